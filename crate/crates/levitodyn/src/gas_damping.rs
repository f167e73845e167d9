//! Residual-gas damping of the torsional and center-of-mass motion in the
//! free-molecular regime, and the thermal phonon occupation.

use std::f64::consts::PI;

use crate::constants::BOLTZMANN;
use crate::ellipsoid::EllipsoidGeometry;
use crate::{Error, Result};

/// Below this eccentricity the shape functions are evaluated by series;
/// the closed forms lose all significance (f3 carries a 1/e^4 prefactor).
const SERIES_CUTOFF: f64 = 1e-3;

/// Residual gas: pressure, temperature, molecular mass and accommodation
/// coefficient (fraction of diffusely reflected collisions).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GasParams {
    pressure: f64,
    temperature: f64,
    molecular_mass: f64,
    accommodation: f64,
}

impl GasParams {
    pub fn new(
        pressure: f64,
        temperature: f64,
        molecular_mass: f64,
        accommodation: f64,
    ) -> Result<Self> {
        if !(pressure >= 0.0 && pressure.is_finite()) {
            return Err(Error::InvalidParameter("gas pressure must be >= 0".into()));
        }
        if !(temperature > 0.0 && temperature.is_finite()) {
            return Err(Error::InvalidParameter("gas temperature must be positive".into()));
        }
        if !(molecular_mass > 0.0 && molecular_mass.is_finite()) {
            return Err(Error::InvalidParameter("molecular mass must be positive".into()));
        }
        if !(0.0..=1.0).contains(&accommodation) {
            return Err(Error::InvalidParameter(
                "accommodation coefficient must lie in [0, 1]".into(),
            ));
        }
        Ok(Self {
            pressure,
            temperature,
            molecular_mass,
            accommodation,
        })
    }

    pub fn pressure(&self) -> f64 {
        self.pressure
    }
    pub fn temperature(&self) -> f64 {
        self.temperature
    }
    pub fn molecular_mass(&self) -> f64 {
        self.molecular_mass
    }
    pub fn accommodation(&self) -> f64 {
        self.accommodation
    }

    /// Gas mass density rho_a = m_a P / (k_B T_a).
    pub fn mass_density(&self) -> f64 {
        self.molecular_mass * self.pressure / (BOLTZMANN * self.temperature)
    }

    /// Mean thermal speed v = sqrt(8 k_B T_a / (pi m_a)).
    pub fn mean_thermal_velocity(&self) -> f64 {
        (8.0 * BOLTZMANN * self.temperature / (PI * self.molecular_mass)).sqrt()
    }
}

/// arcsin(e)/e, by series below the cutoff.
fn asinc(e: f64) -> f64 {
    if e < SERIES_CUTOFF {
        let e2 = e * e;
        return 1.0 + e2 / 6.0 + 3.0 * e2 * e2 / 40.0 + 15.0 * e2 * e2 * e2 / 336.0;
    }
    e.asin() / e
}

/// Shape functions of the torsional drag. Sphere limits: f1, f2 -> 1 and
/// f3 -> 4/15.
fn shape_functions(e: f64) -> (f64, f64, f64) {
    let e2 = e * e;
    if e < SERIES_CUTOFF {
        let f1 = 1.0 - 0.3 * e2 - 3.0 / 56.0 * e2 * e2;
        let f2 = 1.0 - 0.1 * e2 - 3.0 / 280.0 * e2 * e2;
        let f3 = 4.0 / 15.0 + 2.0 / 35.0 * e2 + e2 * e2 / 42.0;
        return (f1, f2, f3);
    }
    let s = (1.0 - e2).sqrt();
    let ae = asinc(e);
    let f1 = 3.0 / (8.0 * e2) * (ae - (1.0 - 2.0 * e2) * s);
    let f2 = 3.0 / (16.0 * e2) * ((1.0 + 2.0 * e2) * s - ae * (1.0 - 4.0 * e2));
    let f3 = 1.0 / (4.0 * e2 * e2) * ((3.0 - 2.0 * e2) * s + ae * (4.0 * e2 - 3.0));
    (f1, f2, f3)
}

fn prolate_eccentricity(geom: &EllipsoidGeometry) -> Result<f64> {
    let e = geom.eccentricity()?;
    if e >= 1.0 {
        return Err(Error::InvalidParameter("eccentricity must be below 1".into()));
    }
    Ok(e)
}

/// Gas damping rate of the torsional mode [rad/s].
///
/// gamma_phi = 5 rho_a v a^3 sqrt(1-e^2) / (8 rho (a^2+b^2)^2)
///             * [ gamma_ac (f1 + (1-e^2) f2)
///                 + 3 (1 - gamma_ac (6-pi)/8) e^4 f3 ].
pub fn torsional_damping(gas: &GasParams, geom: &EllipsoidGeometry) -> Result<f64> {
    let e = prolate_eccentricity(geom)?;
    let e2 = e * e;
    let (f1, f2, f3) = shape_functions(e);
    let gac = gas.accommodation();
    let bracket =
        gac * (f1 + (1.0 - e2) * f2) + 3.0 * (1.0 - gac * (6.0 - PI) / 8.0) * e2 * e2 * f3;
    let a = geom.semi_major();
    let b = geom.semi_middle();
    let sum_sq = a * a + b * b;
    let prefactor = 5.0 * gas.mass_density() * gas.mean_thermal_velocity() * a.powi(3)
        * (1.0 - e2).sqrt()
        / (8.0 * geom.density() * sum_sq * sum_sq);
    Ok(prefactor * bracket)
}

/// Gas damping rate of the CoM mode [rad/s].
///
/// gamma_y = 3 rho_a v a / (8 rho b^2)
///           * [ gamma_ac/2 (1 - e^2 + sqrt(1-e^2) asin(e)/e)
///               + (1 - gamma_ac (6-pi)/8)
///                 ((1-e^2)/e^2 + (2e^2-1) sqrt(1-e^2) asin(e)/e^3) ].
pub fn com_damping(gas: &GasParams, geom: &EllipsoidGeometry) -> Result<f64> {
    let e = prolate_eccentricity(geom)?;
    let e2 = e * e;
    let gac = gas.accommodation();
    let specular = 1.0 - gac * (6.0 - PI) / 8.0;
    let bracket = if e < SERIES_CUTOFF {
        gac / 2.0 * (2.0 - 4.0 / 3.0 * e2 - 2.0 / 15.0 * e2 * e2)
            + specular * (4.0 / 3.0 - 8.0 / 15.0 * e2 - 4.0 / 21.0 * e2 * e2)
    } else {
        let s = (1.0 - e2).sqrt();
        let ae = asinc(e);
        gac / 2.0 * (1.0 - e2 + s * ae)
            + specular * ((1.0 - e2) / e2 + (2.0 * e2 - 1.0) * s * ae / e2)
    };
    let a = geom.semi_major();
    let b = geom.semi_middle();
    let prefactor =
        3.0 * gas.mass_density() * gas.mean_thermal_velocity() * a / (8.0 * geom.density() * b * b);
    Ok(prefactor * bracket)
}

/// Bose thermal occupation (exp(hbar omega / k_B T) - 1)^-1; zero at T = 0.
pub fn thermal_occupation(omega_m: f64, temperature: f64) -> Result<f64> {
    if !(omega_m > 0.0 && omega_m.is_finite()) {
        return Err(Error::InvalidParameter("frequency must be positive".into()));
    }
    if !(temperature >= 0.0 && temperature.is_finite()) {
        return Err(Error::InvalidParameter("temperature must be >= 0".into()));
    }
    if temperature == 0.0 {
        return Ok(0.0);
    }
    let x = crate::constants::REDUCED_PLANCK * omega_m / (BOLTZMANN * temperature);
    if x > 700.0 {
        return Ok(0.0);
    }
    Ok(1.0 / x.exp_m1())
}
