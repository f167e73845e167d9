//! End-to-end assembly of one levitated optomechanical system: geometry
//! and optics in, linear model out. Shared by the CLI scenarios and the
//! acceptance suite.

use crate::dynamics::{build_model, LinearModel};
use crate::ellipsoid::{axis_polarizabilities, EllipsoidGeometry, Polarizability};
use crate::gas_damping::{com_damping, thermal_occupation, torsional_damping, GasParams};
use crate::trap_cavity::{
    mode_params, solve_waist_for_target_coupling, zero_point_amplitude, CavityBlueprint,
    CavityParams, ModeKind, ModeParams, TweezerParams,
};
use crate::Result;

/// How the cavity waist is determined.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WaistSpec {
    /// Use this waist [m].
    Given(f64),
    /// Fit the waist so the coherent-scattering coupling hits this target
    /// [rad/s] at the configured tweezer power.
    FitToCoupling(f64),
}

/// Full description of a single levitated optomechanical setup.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemParams {
    pub geometry: EllipsoidGeometry,
    pub rel_permittivity: f64,
    pub tweezer: TweezerParams,
    pub cavity: CavityBlueprint,
    pub waist: WaistSpec,
    pub mode_kind: ModeKind,
    pub gas: GasParams,
    /// Temperature of the mechanical bath [K].
    pub bath_temperature: f64,
    /// Cavity energy decay rate [rad/s].
    pub kappa: f64,
}

impl SystemParams {
    pub fn polarizability(&self) -> Result<Polarizability> {
        axis_polarizabilities(&self.geometry, self.rel_permittivity)
    }

    /// Resolve the cavity waist (fitting it to the target coupling when
    /// requested) and return the complete cavity.
    pub fn resolve_cavity(&self) -> Result<CavityParams> {
        match self.waist {
            WaistSpec::Given(w) => self.cavity.with_waist(w),
            WaistSpec::FitToCoupling(target) => {
                let pol = self.polarizability()?;
                let zpf = self.zero_point(&pol)?;
                let w = solve_waist_for_target_coupling(
                    target,
                    self.mode_kind,
                    &self.tweezer,
                    &self.cavity,
                    &pol,
                    zpf,
                )?;
                self.cavity.with_waist(w)
            }
        }
    }

    fn zero_point(&self, pol: &Polarizability) -> Result<f64> {
        let (mass, inertia) = self.geometry.mass_and_inertia();
        match self.mode_kind {
            ModeKind::Com => {
                let omega = crate::trap_cavity::com_frequency(&self.tweezer, &self.geometry, pol)?;
                zero_point_amplitude(mass, omega)
            }
            ModeKind::Torsional => {
                let omega =
                    crate::trap_cavity::torsional_frequency(&self.tweezer, &self.geometry, pol)?;
                zero_point_amplitude(inertia, omega)
            }
        }
    }

    /// Derived mode parameters at the resolved cavity.
    pub fn mode_params(&self) -> Result<ModeParams> {
        let pol = self.polarizability()?;
        let cavity = self.resolve_cavity()?;
        mode_params(
            self.mode_kind,
            &self.tweezer,
            &cavity,
            &self.geometry,
            &pol,
        )
    }

    /// Gas damping rate of the selected mechanical mode [rad/s].
    pub fn mechanical_damping(&self) -> Result<f64> {
        match self.mode_kind {
            ModeKind::Torsional => torsional_damping(&self.gas, &self.geometry),
            ModeKind::Com => com_damping(&self.gas, &self.geometry),
        }
    }

    /// Full pipeline to the linear Langevin model on the red sideband.
    pub fn linear_model(&self) -> Result<LinearModel> {
        let mode = self.mode_params()?;
        let gamma = self.mechanical_damping()?;
        let n_bar = thermal_occupation(mode.omega_m, self.bath_temperature)?;
        build_model(mode.omega_m, gamma, mode.g_cs, mode.delta, self.kappa, n_bar)
    }

    /// Same system at a different tweezer power. The cavity waist must be
    /// resolved separately if it is power-fitted: sweeps fit once at the
    /// reference power, then hold the cavity fixed.
    pub fn with_power(&self, power: f64) -> Result<Self> {
        Ok(Self {
            tweezer: self.tweezer.with_power(power)?,
            ..self.clone()
        })
    }

    pub fn with_waist(&self, waist: WaistSpec) -> Self {
        Self {
            waist,
            ..self.clone()
        }
    }
}
