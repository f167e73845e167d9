//! Flat key-value configuration with dotted sections.
//!
//! Files hold `key = value` lines; `#` starts a comment. Frequencies are
//! plain Hz in the file and converted to angular rad/s at this boundary.
//! A `com.`-prefixed key overrides its base counterpart for the
//! center-of-mass branch of the two-system scenarios (fig2, figS2).

use std::collections::BTreeMap;
use std::path::Path;

use levitodyn::constants::MEAN_AIR_MOLECULE_MASS;
use levitodyn::ellipsoid::EllipsoidGeometry;
use levitodyn::gas_damping::GasParams;
use levitodyn::output_filter::FilterKind;
use levitodyn::system::{SystemParams, WaistSpec};
use levitodyn::trap_cavity::{CavityBlueprint, ModeKind, TweezerParams};

use crate::{CliError, Result};

const TAU: f64 = std::f64::consts::TAU;

/// Every key the parser accepts (without the `com.` overlay prefix).
const KNOWN_KEYS: &[&str] = &[
    "geometry.a_m",
    "geometry.b_m",
    "geometry.c_m",
    "geometry.density_kgm3",
    "geometry.rel_permittivity",
    "tweezer.power_w",
    "tweezer.waist_m",
    "tweezer.wavelength_m",
    "cavity.length_m",
    "cavity.wavelength_m",
    "cavity.phase_rad",
    "cavity.kappa_hz",
    "cavity.waist_m",
    "cavity.target_coupling_hz",
    "mode.kind",
    "gas.pressure_pa",
    "gas.temperature_k",
    "gas.molecular_mass_kg",
    "gas.accommodation",
    "bath.temperature_k",
    "filter.width_hz",
    "swap.transmissivity",
    "swap.eta1",
    "swap.eta2",
    "swap.mode",
    "loss.detector_efficiency",
    "loss.attenuation_db_km",
    "loss.fiber_length_km",
    "sweep.axis",
    "sweep.min",
    "sweep.max",
    "sweep.points",
    "sweep.scale",
    "dynamics.g_over_omega",
    "dynamics.blue_detuning",
];

/// Raw parsed key-value map.
#[derive(Debug, Clone)]
pub struct RawConfig {
    map: BTreeMap<String, String>,
}

impl RawConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                CliError::Config(format!("line {}: expected `key = value`", lineno + 1))
            })?;
            let key = key.trim().to_string();
            let value = value.trim().to_string();
            if value.is_empty() {
                return Err(CliError::Config(format!("key `{key}` has an empty value")));
            }
            let base = key.strip_prefix("com.").unwrap_or(&key);
            if !KNOWN_KEYS.contains(&base) {
                return Err(CliError::Config(format!("unknown key `{key}`")));
            }
            if map.insert(key.clone(), value).is_some() {
                return Err(CliError::Config(format!("duplicate key `{key}`")));
            }
        }
        Ok(Self { map })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            CliError::Config(format!("cannot read config {}: {e}", path.display()))
        })?;
        Self::parse(&text)
    }

    /// Base view with every `com.`-prefixed key folded over its base key.
    pub fn com_overlay(&self) -> RawConfig {
        let mut map: BTreeMap<String, String> = self
            .map
            .iter()
            .filter(|(k, _)| !k.starts_with("com."))
            .map(|(k, v)| (k.clone(), v.clone()))
            .collect();
        for (k, v) in &self.map {
            if let Some(base) = k.strip_prefix("com.") {
                map.insert(base.to_string(), v.clone());
            }
        }
        RawConfig { map }
    }

    pub fn has_com_overlay(&self) -> bool {
        self.map.keys().any(|k| k.starts_with("com."))
    }

    fn get(&self, key: &str) -> Option<&str> {
        self.map.get(key).map(|s| s.as_str())
    }

    pub fn f64_required(&self, key: &str) -> Result<f64> {
        let raw = self
            .get(key)
            .ok_or_else(|| CliError::Config(format!("missing required key `{key}`")))?;
        raw.parse::<f64>()
            .map_err(|_| CliError::Config(format!("key `{key}`: `{raw}` is not a number")))
    }

    pub fn f64_or(&self, key: &str, default: f64) -> Result<f64> {
        match self.get(key) {
            None => Ok(default),
            Some(_) => self.f64_required(key),
        }
    }

    pub fn f64_optional(&self, key: &str) -> Result<Option<f64>> {
        match self.get(key) {
            None => Ok(None),
            Some(_) => self.f64_required(key).map(Some),
        }
    }

    pub fn usize_or(&self, key: &str, default: usize) -> Result<usize> {
        match self.get(key) {
            None => Ok(default),
            Some(raw) => raw
                .parse::<usize>()
                .map_err(|_| CliError::Config(format!("key `{key}`: `{raw}` is not an integer"))),
        }
    }

    pub fn bool_or(&self, key: &str, default: bool) -> Result<bool> {
        match self.get(key) {
            None => Ok(default),
            Some("true") => Ok(true),
            Some("false") => Ok(false),
            Some(raw) => Err(CliError::Config(format!(
                "key `{key}`: `{raw}` is not true/false"
            ))),
        }
    }

    pub fn str_or(&self, key: &str, default: &str) -> String {
        self.get(key).unwrap_or(default).to_string()
    }

    fn positive(&self, key: &str) -> Result<f64> {
        let v = self.f64_required(key)?;
        if !(v > 0.0 && v.is_finite()) {
            return Err(CliError::Config(format!(
                "key `{key}`: value {v} must be positive"
            )));
        }
        Ok(v)
    }
}

/// Sweep axis of the `custom` scenario.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    Power,
    Phase,
    Gamma,
    Temperature,
    Eta,
    Pressure,
    Distance,
}

impl SweepAxis {
    fn parse(s: &str) -> Result<Self> {
        match s {
            "power" => Ok(Self::Power),
            "phase" => Ok(Self::Phase),
            "gamma" => Ok(Self::Gamma),
            "temperature" => Ok(Self::Temperature),
            "eta" => Ok(Self::Eta),
            "pressure" => Ok(Self::Pressure),
            "distance" => Ok(Self::Distance),
            other => Err(CliError::Config(format!(
                "sweep.axis `{other}` is not one of power|phase|gamma|temperature|eta|pressure|distance"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepScale {
    Linear,
    Log,
}

/// Sweep axis definition with grid generation. `scale` is `None` when the
/// config did not set it; each scenario then applies its natural default.
#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub axis: Option<SweepAxis>,
    pub min: Option<f64>,
    pub max: Option<f64>,
    pub points: usize,
    pub scale: Option<SweepScale>,
}

impl SweepSpec {
    /// Materialize the grid, with a fallback scale for this scenario.
    pub fn grid(&self, default_scale: SweepScale) -> Result<Vec<f64>> {
        let min = self
            .min
            .ok_or_else(|| CliError::Config("missing required key `sweep.min`".into()))?;
        let max = self
            .max
            .ok_or_else(|| CliError::Config("missing required key `sweep.max`".into()))?;
        let scale = self.scale.unwrap_or(default_scale);
        if max < min {
            return Err(CliError::Config("sweep.max must be >= sweep.min".into()));
        }
        if scale == SweepScale::Log && min <= 0.0 {
            return Err(CliError::Config(
                "log sweeps require a positive sweep.min".into(),
            ));
        }
        if self.points == 1 {
            return Ok(vec![min]);
        }
        let n = self.points;
        Ok((0..n)
            .map(|k| {
                let f = k as f64 / (n - 1) as f64;
                match scale {
                    SweepScale::Linear => min + (max - min) * f,
                    SweepScale::Log => min * (max / min).powf(f),
                }
            })
            .collect())
    }
}

/// Fully validated scenario configuration.
#[derive(Debug, Clone)]
pub struct ScenarioConfig {
    /// Primary system described by the base keys.
    pub system: SystemParams,
    /// Secondary system for the two-branch scenarios, from the `com.`
    /// overlay (or the base keys if no overlay is present).
    pub com_system: SystemParams,
    /// Fixed filter width [rad/s] for fixed-width scenarios, if given.
    pub filter_width: Option<f64>,
    pub swap_transmissivity: f64,
    pub swap_eta: (f64, f64),
    pub swap_mode: FilterKind,
    pub loss_detector_efficiency: Option<f64>,
    pub loss_attenuation_db_km: Option<f64>,
    pub sweep: SweepSpec,
    /// Optional coupling override g = r * omega_m (figS3-style runs).
    pub g_over_omega: Option<f64>,
    /// Flip to the blue sideband, Delta = -omega_m.
    pub blue_detuning: bool,
}

fn system_from(raw: &RawConfig) -> Result<SystemParams> {
    let geometry = EllipsoidGeometry::new(
        raw.positive("geometry.a_m")?,
        raw.positive("geometry.b_m")?,
        raw.positive("geometry.c_m")?,
        raw.positive("geometry.density_kgm3")?,
    )
    .map_err(|e| CliError::Config(format!("geometry: {e}")))?;
    let rel_permittivity = raw.positive("geometry.rel_permittivity")?;

    let tweezer = TweezerParams::new(
        raw.positive("tweezer.power_w")?,
        raw.positive("tweezer.waist_m")?,
        raw.positive("tweezer.wavelength_m")?,
    )
    .map_err(|e| CliError::Config(format!("tweezer: {e}")))?;

    let cavity_wavelength = raw.f64_or("cavity.wavelength_m", tweezer.wavelength())?;
    let cavity = CavityBlueprint::new(
        raw.positive("cavity.length_m")?,
        cavity_wavelength,
        raw.f64_required("cavity.phase_rad")?,
    )
    .map_err(|e| CliError::Config(format!("cavity: {e}")))?;

    let waist = match (
        raw.f64_optional("cavity.waist_m")?,
        raw.f64_optional("cavity.target_coupling_hz")?,
    ) {
        (Some(w), None) => WaistSpec::Given(w),
        (None, Some(g_hz)) => WaistSpec::FitToCoupling(TAU * g_hz),
        (Some(_), Some(_)) => {
            return Err(CliError::Config(
                "give either cavity.waist_m or cavity.target_coupling_hz, not both".into(),
            ))
        }
        (None, None) => {
            return Err(CliError::Config(
                "missing required key `cavity.waist_m` (or `cavity.target_coupling_hz`)".into(),
            ))
        }
    };

    let kappa = TAU * raw.positive("cavity.kappa_hz")?;

    let mode_kind = match raw.str_or("mode.kind", "").as_str() {
        "torsional" => ModeKind::Torsional,
        "com" => ModeKind::Com,
        "" => return Err(CliError::Config("missing required key `mode.kind`".into())),
        other => {
            return Err(CliError::Config(format!(
                "mode.kind `{other}` is not torsional|com"
            )))
        }
    };

    let pressure = raw.f64_required("gas.pressure_pa")?;
    if !(pressure >= 0.0 && pressure.is_finite()) {
        return Err(CliError::Config(format!(
            "key `gas.pressure_pa`: value {pressure} outside valid range (must be >= 0)"
        )));
    }
    let gas = GasParams::new(
        pressure,
        raw.f64_or("gas.temperature_k", 300.0)?,
        raw.f64_or("gas.molecular_mass_kg", MEAN_AIR_MOLECULE_MASS)?,
        raw.f64_or("gas.accommodation", 0.9)?,
    )
    .map_err(|e| CliError::Config(format!("gas: {e}")))?;

    Ok(SystemParams {
        geometry,
        rel_permittivity,
        tweezer,
        cavity,
        waist,
        mode_kind,
        gas,
        bath_temperature: raw.f64_or("bath.temperature_k", 300.0)?,
        kappa,
    })
}

/// Load and validate a scenario configuration file.
pub fn load_config(path: &Path) -> Result<ScenarioConfig> {
    let raw = RawConfig::load(path)?;
    scenario_config_from(&raw)
}

pub fn scenario_config_from(raw: &RawConfig) -> Result<ScenarioConfig> {
    let system = system_from(raw)?;
    let com_raw = raw.com_overlay();
    let mut com_system = system_from(&com_raw)?;
    com_system.mode_kind = ModeKind::Com;

    let transmissivity = raw.f64_or("swap.transmissivity", 0.5)?;
    if !(transmissivity > 0.0 && transmissivity < 1.0) {
        return Err(CliError::Config(format!(
            "key `swap.transmissivity`: {transmissivity} outside (0, 1)"
        )));
    }
    let eta1 = raw.f64_or("swap.eta1", 1.0)?;
    let eta2 = raw.f64_or("swap.eta2", 1.0)?;
    for (key, eta) in [("swap.eta1", eta1), ("swap.eta2", eta2)] {
        if !(eta > 0.0 && eta <= 1.0) {
            return Err(CliError::Config(format!(
                "key `{key}`: {eta} outside (0, 1]"
            )));
        }
    }
    let swap_mode = match raw.str_or("swap.mode", "bs").as_str() {
        "bs" => FilterKind::Bs,
        "tms" => FilterKind::Tms,
        other => {
            return Err(CliError::Config(format!(
                "swap.mode `{other}` is not bs|tms"
            )))
        }
    };

    let sweep_axis = match raw.get("sweep.axis") {
        Some(s) => Some(SweepAxis::parse(s)?),
        None => None,
    };
    let scale = match raw.get("sweep.scale") {
        None => None,
        Some("log") => Some(SweepScale::Log),
        Some("linear") => Some(SweepScale::Linear),
        Some(other) => {
            return Err(CliError::Config(format!(
                "sweep.scale `{other}` is not linear|log"
            )))
        }
    };
    let sweep = SweepSpec {
        axis: sweep_axis,
        min: raw.f64_optional("sweep.min")?,
        max: raw.f64_optional("sweep.max")?,
        points: raw.usize_or("sweep.points", 25)?,
        scale,
    };
    if sweep.points == 0 {
        return Err(CliError::Config("sweep.points must be at least 1".into()));
    }

    let g_over_omega = raw.f64_optional("dynamics.g_over_omega")?;
    if let Some(r) = g_over_omega {
        if !(r > 0.0 && r.is_finite()) {
            return Err(CliError::Config(format!(
                "key `dynamics.g_over_omega`: {r} must be positive"
            )));
        }
    }

    Ok(ScenarioConfig {
        system,
        com_system,
        filter_width: raw.f64_optional("filter.width_hz")?.map(|f| TAU * f),
        swap_transmissivity: transmissivity,
        swap_eta: (eta1, eta2),
        swap_mode,
        loss_detector_efficiency: raw.f64_optional("loss.detector_efficiency")?,
        loss_attenuation_db_km: raw.f64_optional("loss.attenuation_db_km")?,
        sweep,
        g_over_omega,
        blue_detuning: raw.bool_or("dynamics.blue_detuning", false)?,
    })
}
