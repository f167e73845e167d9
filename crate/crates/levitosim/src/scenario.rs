//! Named reproduction scenarios. Every scenario sweeps one axis and emits
//! one deterministic table; sweep points evaluate concurrently.
//!
//! Entanglement columns use the time-sequenced output construction
//! (`output_cm_two_sided`), the arrangement behind the reference curves;
//! rows whose linear model is unstable carry stable = 0 and empty
//! entanglement cells.

use rayon::prelude::*;

use levitodyn::bell_swap::{conditioned_cm, detection_efficiency, JointCm, LossChannel, SwapSetup};
use levitodyn::dynamics::{build_model, LinearModel};
use levitodyn::gas_damping::thermal_occupation;
use levitodyn::gaussian_tools::log_negativity_of_pair;
use levitodyn::output_filter::{output_cm_two_sided, FilterKind, OutputCm};
use levitodyn::system::{SystemParams, WaistSpec};
use levitodyn::trap_cavity::{couplings_com, couplings_torsional, ModeKind};

use crate::config::{ScenarioConfig, SweepAxis, SweepScale};
use crate::table::ResultTable;
use crate::{CliError, Result};

const TAU: f64 = std::f64::consts::TAU;
/// Relative tolerance of the output covariance integral.
const QUAD_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scenario {
    Fig2,
    Fig3a,
    Fig3b,
    Fig4a,
    Fig4b,
    FigS2,
    FigS3,
    Custom,
}

impl std::str::FromStr for Scenario {
    type Err = CliError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fig2" => Ok(Self::Fig2),
            "fig3a" => Ok(Self::Fig3a),
            "fig3b" => Ok(Self::Fig3b),
            "fig4a" => Ok(Self::Fig4a),
            "fig4b" => Ok(Self::Fig4b),
            "figS2" | "figs2" => Ok(Self::FigS2),
            "figS3" | "figs3" => Ok(Self::FigS3),
            "custom" => Ok(Self::Custom),
            other => Err(CliError::Config(format!(
                "unknown scenario `{other}`; expected one of fig2 fig3a fig3b fig4a fig4b figS2 figS3 custom"
            ))),
        }
    }
}

pub fn run_scenario(scenario: Scenario, cfg: &ScenarioConfig, jobs: usize) -> Result<ResultTable> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| CliError::Config(format!("cannot build thread pool: {e}")))?;
    pool.install(|| match scenario {
        Scenario::Fig2 => run_fig2(cfg),
        Scenario::Fig3a => run_filter_sweep(cfg, None),
        Scenario::FigS3 => run_filter_sweep(cfg, Some(cfg.g_over_omega.unwrap_or(0.04))),
        Scenario::Fig3b => run_swap_filter_sweep(cfg),
        Scenario::Fig4a => run_temperature_sweep(cfg),
        Scenario::Fig4b => run_eta_sweep(cfg),
        Scenario::FigS2 => run_phase_sweep(cfg),
        Scenario::Custom => run_custom(cfg),
    })
}

/// Annotate a numerical failure with the sweep point it occurred at.
fn at_point<T>(r: levitodyn::Result<T>, axis: &str, value: f64) -> Result<T> {
    r.map_err(|e| match CliError::from(e) {
        CliError::Numeric(msg) => {
            CliError::Numeric(format!("at sweep point {axis} = {value:.6e}: {msg}"))
        }
        other => other,
    })
}

/// Linear model of a system with the scenario's coupling/detuning
/// overrides applied.
fn scenario_model(
    sys: &SystemParams,
    cfg: &ScenarioConfig,
    g_over_omega: Option<f64>,
) -> levitodyn::Result<LinearModel> {
    let mode = sys.mode_params()?;
    let gamma = sys.mechanical_damping()?;
    let n_bar = thermal_occupation(mode.omega_m, sys.bath_temperature)?;
    let g = match g_over_omega {
        Some(r) => r * mode.omega_m,
        None => mode.g_cs,
    };
    let delta = if cfg.blue_detuning {
        -mode.omega_m
    } else {
        mode.omega_m
    };
    build_model(mode.omega_m, gamma, g, delta, sys.kappa, n_bar)
}

/// Freeze the cavity waist at the configured operating point so sweeps
/// hold the physical cavity fixed.
fn frozen_waist_system(sys: &SystemParams) -> levitodyn::Result<SystemParams> {
    let cavity = sys.resolve_cavity()?;
    Ok(sys.with_waist(WaistSpec::Given(cavity.waist())))
}

fn swap_setup(cfg: &ScenarioConfig, mode: FilterKind) -> Result<SwapSetup> {
    SwapSetup::new(cfg.swap_transmissivity, cfg.swap_eta.0, cfg.swap_eta.1, mode)
        .map_err(CliError::from)
}

fn swap_en(out: &OutputCm, setup: &SwapSetup) -> levitodyn::Result<f64> {
    let joint = JointCm::from_independent(out, out, setup.mode_choice)?;
    let vf = conditioned_cm(&joint, setup)?;
    log_negativity_of_pair(&vf, 0, 1)
}

fn required_filter_width(cfg: &ScenarioConfig) -> Result<f64> {
    cfg.filter_width
        .ok_or_else(|| CliError::Config("missing required key `filter.width_hz`".into()))
}

/// Frequencies and couplings of both branches against tweezer power.
fn run_fig2(cfg: &ScenarioConfig) -> Result<ResultTable> {
    if cfg.system.mode_kind != ModeKind::Torsional {
        return Err(CliError::Config(
            "fig2 expects the base system to be torsional (mode.kind = torsional)".into(),
        ));
    }
    let tor = frozen_waist_system(&cfg.system)?;
    let com = frozen_waist_system(&cfg.com_system)?;
    let powers = cfg.sweep.grid(SweepScale::Log)?;

    let rows: Vec<Result<Vec<Option<f64>>>> = powers
        .par_iter()
        .map(|&p| -> Result<Vec<Option<f64>>> {
            let t = tor.with_power(p)?;
            let c = com.with_power(p)?;
            let mt = at_point(t.mode_params(), "power_w", p)?;
            let mc = at_point(c.mode_params(), "power_w", p)?;
            Ok(vec![
                Some(p),
                Some(mt.omega_m / TAU),
                Some(mt.g_cs / TAU),
                Some(mt.g_cs / mt.omega_m),
                Some(mc.omega_m / TAU),
                Some(mc.g_cs / TAU),
                Some(mc.g_cs / mc.omega_m),
            ])
        })
        .collect();

    let mut table = ResultTable::new(&[
        "power_w",
        "omega_phi_hz",
        "g_sphi_hz",
        "ratio_phi",
        "omega_y_hz",
        "g_sy_hz",
        "ratio_y",
    ]);
    for row in rows {
        table.push_row(row?)?;
    }
    Ok(table)
}

/// All four couplings against the cavity standing-wave phase.
fn run_phase_sweep(cfg: &ScenarioConfig) -> Result<ResultTable> {
    let tor = frozen_waist_system(&cfg.system)?;
    let com = frozen_waist_system(&cfg.com_system)?;
    let tor_cavity = tor.resolve_cavity()?;
    let com_cavity = com.resolve_cavity()?;
    let tor_pol = tor.polarizability()?;
    let com_pol = com.polarizability()?;
    let tor_mode = tor.mode_params()?;
    let com_mode = com.mode_params()?;
    let phases = cfg.sweep.grid(SweepScale::Linear)?;

    let rows: Vec<Result<Vec<Option<f64>>>> = phases
        .par_iter()
        .map(|&phi| -> Result<Vec<Option<f64>>> {
            let cav_t = levitodyn::trap_cavity::CavityParams::new(
                tor_cavity.length(),
                tor_cavity.waist(),
                tor_cavity.wavelength(),
                phi,
            )?;
            let cav_c = levitodyn::trap_cavity::CavityParams::new(
                com_cavity.length(),
                com_cavity.waist(),
                com_cavity.wavelength(),
                phi,
            )?;
            let (g_phi, g_sphi) =
                couplings_torsional(&tor.tweezer, &cav_t, &tor_pol, tor_mode.zpf);
            let (g_y, g_sy) = couplings_com(&com.tweezer, &cav_c, &com_pol, com_mode.zpf);
            Ok(vec![
                Some(phi),
                Some(g_phi / TAU),
                Some(g_sphi / TAU),
                Some(g_y / TAU),
                Some(g_sy / TAU),
            ])
        })
        .collect();

    let mut table = ResultTable::new(&[
        "phase_rad",
        "g_phi_hz",
        "g_sphi_hz",
        "g_y_hz",
        "g_sy_hz",
    ]);
    for row in rows {
        table.push_row(row?)?;
    }
    Ok(table)
}

/// Single-system output entanglement against the filter width.
fn run_filter_sweep(cfg: &ScenarioConfig, g_over_omega: Option<f64>) -> Result<ResultTable> {
    let sys = frozen_waist_system(&cfg.system)?;
    let model = scenario_model(&sys, cfg, g_over_omega)?;
    let widths_hz = cfg.sweep.grid(SweepScale::Log)?;

    let rows: Vec<Result<Vec<Option<f64>>>> = widths_hz
        .par_iter()
        .map(|&w_hz| -> Result<Vec<Option<f64>>> {
            let width = TAU * w_hz;
            if !model.is_stable() {
                return Ok(vec![Some(w_hz), Some(0.0), None, None, None]);
            }
            let out = at_point(
                output_cm_two_sided(&model, width, QUAD_TOL),
                "gamma_filter_hz",
                w_hz,
            )?;
            Ok(vec![
                Some(w_hz),
                Some(1.0),
                Some(out.en_tms_mechanics()?),
                Some(out.en_bs_mechanics()?),
                Some(out.en_tms_bs()?),
            ])
        })
        .collect();

    let mut table = ResultTable::new(&[
        "gamma_filter_hz",
        "stable",
        "en_tms_tor",
        "en_bs_tor",
        "en_tms_bs",
    ]);
    for row in rows {
        table.push_row(row?)?;
    }
    Ok(table)
}

/// Two-system swapped entanglement against the filter width, for both
/// temporal-mode choices.
fn run_swap_filter_sweep(cfg: &ScenarioConfig) -> Result<ResultTable> {
    let sys = frozen_waist_system(&cfg.system)?;
    let model = scenario_model(&sys, cfg, None)?;
    let widths_hz = cfg.sweep.grid(SweepScale::Log)?;
    let setup_bs = swap_setup(cfg, FilterKind::Bs)?;
    let setup_tms = swap_setup(cfg, FilterKind::Tms)?;

    let rows: Vec<Result<Vec<Option<f64>>>> = widths_hz
        .par_iter()
        .map(|&w_hz| -> Result<Vec<Option<f64>>> {
            let width = TAU * w_hz;
            if !model.is_stable() {
                return Ok(vec![Some(w_hz), Some(0.0), None, None]);
            }
            let out = at_point(
                output_cm_two_sided(&model, width, QUAD_TOL),
                "gamma_filter_hz",
                w_hz,
            )?;
            let en_bs = at_point(swap_en(&out, &setup_bs), "gamma_filter_hz", w_hz)?;
            let en_tms = at_point(swap_en(&out, &setup_tms), "gamma_filter_hz", w_hz)?;
            Ok(vec![Some(w_hz), Some(1.0), Some(en_bs), Some(en_tms)])
        })
        .collect();

    let mut table = ResultTable::new(&[
        "gamma_filter_hz",
        "stable",
        "en_swap_bs",
        "en_swap_tms",
    ]);
    for row in rows {
        table.push_row(row?)?;
    }
    Ok(table)
}

/// Swapped entanglement against the mechanical bath temperature at fixed
/// filter width.
fn run_temperature_sweep(cfg: &ScenarioConfig) -> Result<ResultTable> {
    let sys = frozen_waist_system(&cfg.system)?;
    let width = required_filter_width(cfg)?;
    let temps = cfg.sweep.grid(SweepScale::Linear)?;
    let setup = swap_setup(cfg, cfg.swap_mode)?;

    let rows: Vec<Result<Vec<Option<f64>>>> = temps
        .par_iter()
        .map(|&t| -> Result<Vec<Option<f64>>> {
            let mut sys_t = sys.clone();
            sys_t.bath_temperature = t;
            let model = at_point(scenario_model(&sys_t, cfg, None), "temperature_k", t)?;
            if !model.is_stable() {
                return Ok(vec![Some(t), Some(0.0), None]);
            }
            let out = at_point(
                output_cm_two_sided(&model, width, QUAD_TOL),
                "temperature_k",
                t,
            )?;
            let en = at_point(swap_en(&out, &setup), "temperature_k", t)?;
            Ok(vec![Some(t), Some(1.0), Some(en)])
        })
        .collect();

    let mut table = ResultTable::new(&["temperature_k", "stable", "en_swap"]);
    for row in rows {
        table.push_row(row?)?;
    }
    Ok(table)
}

/// Swapped entanglement against the detector quantum efficiency at fixed
/// filter width. The output state is computed once; only the measurement
/// changes along the sweep.
fn run_eta_sweep(cfg: &ScenarioConfig) -> Result<ResultTable> {
    let sys = frozen_waist_system(&cfg.system)?;
    let width = required_filter_width(cfg)?;
    let model = scenario_model(&sys, cfg, None)?;
    let etas = cfg.sweep.grid(SweepScale::Linear)?;
    let mut table = ResultTable::new(&["eta", "stable", "en_swap"]);

    if !model.is_stable() {
        for &eta in &etas {
            table.push_row(vec![Some(eta), Some(0.0), None])?;
        }
        return Ok(table);
    }
    let out = output_cm_two_sided(&model, width, QUAD_TOL)?;

    let rows: Vec<Result<Vec<Option<f64>>>> = etas
        .par_iter()
        .map(|&eta| -> Result<Vec<Option<f64>>> {
            let setup = SwapSetup::new(cfg.swap_transmissivity, eta, eta, cfg.swap_mode)?;
            let en = at_point(swap_en(&out, &setup), "eta", eta)?;
            Ok(vec![Some(eta), Some(1.0), Some(en)])
        })
        .collect();
    for row in rows {
        table.push_row(row?)?;
    }
    Ok(table)
}

/// Generic one-axis sweep with the full column set.
fn run_custom(cfg: &ScenarioConfig) -> Result<ResultTable> {
    let axis = cfg
        .sweep
        .axis
        .ok_or_else(|| CliError::Config("missing required key `sweep.axis`".into()))?;
    let (axis_name, default_scale) = match axis {
        SweepAxis::Power => ("power_w", SweepScale::Log),
        SweepAxis::Phase => ("phase_rad", SweepScale::Linear),
        SweepAxis::Gamma => ("gamma_filter_hz", SweepScale::Log),
        SweepAxis::Temperature => ("temperature_k", SweepScale::Linear),
        SweepAxis::Eta => ("eta", SweepScale::Linear),
        SweepAxis::Pressure => ("pressure_pa", SweepScale::Log),
        SweepAxis::Distance => ("distance_km", SweepScale::Linear),
    };
    let grid = cfg.sweep.grid(default_scale)?;
    let sys = frozen_waist_system(&cfg.system)?;

    let loss = match axis {
        SweepAxis::Distance => {
            let eta0 = cfg.loss_detector_efficiency.ok_or_else(|| {
                CliError::Config("missing required key `loss.detector_efficiency`".into())
            })?;
            let alpha = cfg.loss_attenuation_db_km.ok_or_else(|| {
                CliError::Config("missing required key `loss.attenuation_db_km`".into())
            })?;
            Some((eta0, alpha))
        }
        _ => None,
    };

    let rows: Vec<Result<Vec<Option<f64>>>> = grid
        .par_iter()
        .map(|&x| -> Result<Vec<Option<f64>>> {
            // Per-point system and measurement overrides.
            let mut sys_x = sys.clone();
            let mut eta = cfg.swap_eta;
            match axis {
                SweepAxis::Power => sys_x = sys_x.with_power(x)?,
                SweepAxis::Phase => {
                    let cav = sys_x.resolve_cavity()?;
                    sys_x.cavity = levitodyn::trap_cavity::CavityBlueprint::new(
                        cav.length(),
                        cav.wavelength(),
                        x,
                    )?;
                    sys_x = sys_x.with_waist(WaistSpec::Given(cav.waist()));
                }
                SweepAxis::Temperature => sys_x.bath_temperature = x,
                SweepAxis::Pressure => {
                    sys_x.gas = levitodyn::gas_damping::GasParams::new(
                        x,
                        sys_x.gas.temperature(),
                        sys_x.gas.molecular_mass(),
                        sys_x.gas.accommodation(),
                    )?;
                }
                SweepAxis::Eta => eta = (x, x),
                SweepAxis::Distance => {
                    let (eta0, alpha) = loss.expect("distance axis requires loss keys");
                    let chan = LossChannel::new(eta0, alpha, x / 2.0)?;
                    let e = detection_efficiency(&chan);
                    eta = (e, e);
                }
                SweepAxis::Gamma => {}
            }
            let width = match axis {
                SweepAxis::Gamma => TAU * x,
                _ => required_filter_width(cfg)?,
            };
            let model = at_point(scenario_model(&sys_x, cfg, cfg.g_over_omega), axis_name, x)?;
            let mode = at_point(sys_x.mode_params(), axis_name, x)?;
            if !model.is_stable() {
                return Ok(vec![
                    Some(x),
                    Some(mode.omega_m / TAU),
                    Some(model.g / TAU),
                    Some(model.gamma / TAU),
                    Some(model.n_bar),
                    Some(0.0),
                    None,
                    None,
                    None,
                    None,
                ]);
            }
            let out = at_point(output_cm_two_sided(&model, width, QUAD_TOL), axis_name, x)?;
            let setup = SwapSetup::new(cfg.swap_transmissivity, eta.0, eta.1, cfg.swap_mode)?;
            let en_swap = at_point(swap_en(&out, &setup), axis_name, x)?;
            Ok(vec![
                Some(x),
                Some(mode.omega_m / TAU),
                Some(model.g / TAU),
                Some(model.gamma / TAU),
                Some(model.n_bar),
                Some(1.0),
                Some(out.en_tms_mechanics()?),
                Some(out.en_bs_mechanics()?),
                Some(out.en_tms_bs()?),
                Some(en_swap),
            ])
        })
        .collect();

    let mut table = ResultTable::new(&[
        axis_name,
        "omega_m_hz",
        "g_hz",
        "gamma_damping_hz",
        "n_bar",
        "stable",
        "en_tms_tor",
        "en_bs_tor",
        "en_tms_bs",
        "en_swap",
    ]);
    for row in rows {
        table.push_row(row?)?;
    }
    Ok(table)
}
