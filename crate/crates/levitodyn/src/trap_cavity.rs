//! Closed-form trap and cavity quantities for a nano-ellipsoid in an
//! optical tweezer inside a Fabry-Perot cavity: mechanical frequencies,
//! zero-point amplitudes, dispersive and coherent-scattering couplings, and
//! the particle-induced cavity frequency shift.

use std::f64::consts::PI;

use crate::constants::{REDUCED_PLANCK, SPEED_OF_LIGHT, VACUUM_PERMITTIVITY};
use crate::ellipsoid::{EllipsoidGeometry, Polarizability};
use crate::numeric;
use crate::{Error, Result};

/// Optical tweezer defined by power in the focus, focal waist and
/// wavelength.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TweezerParams {
    power: f64,
    waist: f64,
    wavelength: f64,
}

impl TweezerParams {
    pub fn new(power: f64, waist: f64, wavelength: f64) -> Result<Self> {
        for (name, v) in [("power", power), ("waist", waist), ("wavelength", wavelength)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "tweezer {name} must be positive"
                )));
            }
        }
        Ok(Self {
            power,
            waist,
            wavelength,
        })
    }

    pub fn power(&self) -> f64 {
        self.power
    }
    pub fn waist(&self) -> f64 {
        self.waist
    }
    pub fn wavelength(&self) -> f64 {
        self.wavelength
    }

    /// Same tweezer at a different focal power.
    pub fn with_power(&self, power: f64) -> Result<Self> {
        Self::new(power, self.waist, self.wavelength)
    }

    /// Field amplitude in the focus, E0 = sqrt(4 P / (pi eps0 c w0^2)).
    pub fn field_amplitude(&self) -> f64 {
        (4.0 * self.power
            / (PI * VACUUM_PERMITTIVITY * SPEED_OF_LIGHT * self.waist * self.waist))
            .sqrt()
    }

    pub fn wavenumber(&self) -> f64 {
        2.0 * PI / self.wavelength
    }

    /// Optical angular frequency 2 pi c / lambda.
    pub fn angular_frequency(&self) -> f64 {
        2.0 * PI * SPEED_OF_LIGHT / self.wavelength
    }
}

/// Cavity length, wavelength and standing-wave phase at the particle,
/// without a mode waist. `with_waist` completes it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CavityBlueprint {
    pub length: f64,
    pub wavelength: f64,
    /// Phase of the cavity standing wave at the particle position [rad].
    pub phase: f64,
}

impl CavityBlueprint {
    pub fn new(length: f64, wavelength: f64, phase: f64) -> Result<Self> {
        if !(length > 0.0 && length.is_finite()) {
            return Err(Error::InvalidParameter("cavity length must be positive".into()));
        }
        if !(wavelength > 0.0 && wavelength.is_finite()) {
            return Err(Error::InvalidParameter(
                "cavity wavelength must be positive".into(),
            ));
        }
        if !phase.is_finite() {
            return Err(Error::InvalidParameter("cavity phase must be finite".into()));
        }
        Ok(Self {
            length,
            wavelength,
            phase,
        })
    }

    pub fn with_waist(&self, waist: f64) -> Result<CavityParams> {
        CavityParams::new(self.length, waist, self.wavelength, self.phase)
    }
}

/// Complete cavity: blueprint plus mode waist.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CavityParams {
    length: f64,
    waist: f64,
    wavelength: f64,
    phase: f64,
}

impl CavityParams {
    pub fn new(length: f64, waist: f64, wavelength: f64, phase: f64) -> Result<Self> {
        let bp = CavityBlueprint::new(length, wavelength, phase)?;
        if !(waist > 0.0 && waist.is_finite()) {
            return Err(Error::InvalidParameter("cavity waist must be positive".into()));
        }
        Ok(Self {
            length: bp.length,
            waist,
            wavelength: bp.wavelength,
            phase: bp.phase,
        })
    }

    pub fn length(&self) -> f64 {
        self.length
    }
    pub fn waist(&self) -> f64 {
        self.waist
    }
    pub fn wavelength(&self) -> f64 {
        self.wavelength
    }
    pub fn phase(&self) -> f64 {
        self.phase
    }

    /// Mode volume V_c = pi L w_c^2 / 4.
    pub fn mode_volume(&self) -> f64 {
        PI * self.length * self.waist * self.waist / 4.0
    }

    pub fn wavenumber(&self) -> f64 {
        2.0 * PI / self.wavelength
    }

    pub fn angular_frequency(&self) -> f64 {
        2.0 * PI * SPEED_OF_LIGHT / self.wavelength
    }
}

/// Which mechanical degree of freedom is coupled to the cavity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModeKind {
    /// Small-angle libration of the long axis about the tweezer polarization.
    Torsional,
    /// Center-of-mass motion along the cavity axis.
    Com,
}

/// Derived single-mode parameters: frequency, couplings, zero-point
/// amplitude, corrected cavity frequency and detuning.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeParams {
    pub kind: ModeKind,
    /// Mechanical angular frequency [rad/s].
    pub omega_m: f64,
    /// Dispersive optomechanical coupling [rad/s].
    pub g_disp: f64,
    /// Coherent-scattering coupling [rad/s].
    pub g_cs: f64,
    /// Zero-point amplitude: meters for CoM, radians for torsion.
    pub zpf: f64,
    /// Cavity frequency corrected by the particle [rad/s].
    pub omega_c_shifted: f64,
    /// Detuning Delta = omega_c - omega_0 [rad/s].
    pub delta: f64,
}

/// CoM trap frequency along the tweezer polarization axis,
/// omega_y = sqrt(E0^2 alpha_a / (m w0^2)).
pub fn com_frequency(
    tweezer: &TweezerParams,
    geom: &EllipsoidGeometry,
    pol: &Polarizability,
) -> Result<f64> {
    if pol.alpha_a < 0.0 {
        return Err(Error::InvalidParameter("negative polarizability".into()));
    }
    let e0 = tweezer.field_amplitude();
    Ok(e0 * (pol.alpha_a / geom.mass()).sqrt() / tweezer.waist())
}

/// Torsional frequency omega_phi = E0 sqrt((alpha_a - alpha_b) / (2 I)).
/// Requires alpha_a > alpha_b: a symmetric particle has no angular
/// restoring torque.
pub fn torsional_frequency(
    tweezer: &TweezerParams,
    geom: &EllipsoidGeometry,
    pol: &Polarizability,
) -> Result<f64> {
    let aniso = pol.anisotropy();
    if aniso <= 0.0 {
        return Err(Error::InvalidParameter(
            "torsional trap requires alpha_a > alpha_b".into(),
        ));
    }
    let e0 = tweezer.field_amplitude();
    Ok(e0 * (aniso / (2.0 * geom.inertia())).sqrt())
}

/// Zero-point amplitude sqrt(hbar / (2 M omega)) with M the mass (CoM) or
/// moment of inertia (torsion).
pub fn zero_point_amplitude(mass_or_inertia: f64, omega_m: f64) -> Result<f64> {
    if !(mass_or_inertia > 0.0 && omega_m > 0.0) {
        return Err(Error::InvalidParameter(
            "zero-point amplitude needs positive mass and frequency".into(),
        ));
    }
    Ok((REDUCED_PLANCK / (2.0 * mass_or_inertia * omega_m)).sqrt())
}

/// Dispersive and coherent-scattering couplings of the CoM mode:
/// g_y  = alpha_a omega_c k_c y0 sin(2 phi) / (2 eps0 V_c),
/// g_sy = alpha_a E0 k_c y0 sin(phi) sqrt(omega_c / (2 hbar eps0 V_c)).
pub fn couplings_com(
    tweezer: &TweezerParams,
    cavity: &CavityParams,
    pol: &Polarizability,
    zpf: f64,
) -> (f64, f64) {
    let vc = cavity.mode_volume();
    let omega_c = cavity.angular_frequency();
    let kc = cavity.wavenumber();
    let phi = cavity.phase();
    let g_disp = pol.alpha_a * omega_c * kc * zpf * (2.0 * phi).sin()
        / (2.0 * VACUUM_PERMITTIVITY * vc);
    let g_cs = pol.alpha_a
        * tweezer.field_amplitude()
        * kc
        * zpf
        * phi.sin()
        * (omega_c / (2.0 * REDUCED_PLANCK * VACUUM_PERMITTIVITY * vc)).sqrt();
    (g_disp, g_cs)
}

/// Dispersive and coherent-scattering couplings of the torsional mode:
/// g_phi  = (alpha_a - alpha_b) omega_c phi0 cos^2(phi) / (2 eps0 V_c),
/// g_sphi = (alpha_a - alpha_b) E0 phi0 cos(phi) sqrt(omega_c / (8 hbar eps0 V_c)).
pub fn couplings_torsional(
    tweezer: &TweezerParams,
    cavity: &CavityParams,
    pol: &Polarizability,
    zpf: f64,
) -> (f64, f64) {
    let vc = cavity.mode_volume();
    let omega_c = cavity.angular_frequency();
    let phi = cavity.phase();
    let aniso = pol.anisotropy();
    let g_disp =
        aniso * omega_c * zpf * phi.cos().powi(2) / (2.0 * VACUUM_PERMITTIVITY * vc);
    let g_cs = aniso
        * tweezer.field_amplitude()
        * zpf
        * phi.cos()
        * (omega_c / (8.0 * REDUCED_PLANCK * VACUUM_PERMITTIVITY * vc)).sqrt();
    (g_disp, g_cs)
}

/// Cavity frequency corrected by the intracavity particle. The CoM branch
/// shifts by alpha_a cos^2(phi) / (2 eps0 V_c), the torsional branch by
/// (alpha_a + alpha_b) cos^2(phi) / (4 eps0 V_c), both relative.
pub fn shifted_cavity_frequency(
    kind: ModeKind,
    cavity: &CavityParams,
    pol: &Polarizability,
) -> f64 {
    let vc = cavity.mode_volume();
    let cos2 = cavity.phase().cos().powi(2);
    let rel = match kind {
        ModeKind::Com => pol.alpha_a * cos2 / (2.0 * VACUUM_PERMITTIVITY * vc),
        ModeKind::Torsional => {
            (pol.alpha_a + pol.alpha_b) * cos2 / (4.0 * VACUUM_PERMITTIVITY * vc)
        }
    };
    cavity.angular_frequency() * (1.0 - rel)
}

/// Cavity waist such that the coherent-scattering coupling of `kind`
/// equals `target_g`. Bisection over w_c in [1 um, 1 mm]; the map
/// w_c -> g is monotone (g, proportional to V_c^(-1/2), falls as 1/w_c).
pub fn solve_waist_for_target_coupling(
    target_g: f64,
    kind: ModeKind,
    tweezer: &TweezerParams,
    blueprint: &CavityBlueprint,
    pol: &Polarizability,
    zpf: f64,
) -> Result<f64> {
    if !(target_g > 0.0 && target_g.is_finite()) {
        return Err(Error::InvalidParameter("target coupling must be positive".into()));
    }
    let g_at = |w: f64| -> Result<f64> {
        let cav = blueprint.with_waist(w)?;
        let g = match kind {
            ModeKind::Com => couplings_com(tweezer, &cav, pol, zpf).1,
            ModeKind::Torsional => couplings_torsional(tweezer, &cav, pol, zpf).1,
        };
        Ok(g.abs())
    };
    let (lo, hi) = (1e-6, 1e-3);
    let g_lo = g_at(lo)?;
    let g_hi = g_at(hi)?;
    if !(target_g <= g_lo && target_g >= g_hi) {
        return Err(Error::NoBracket { lo, hi });
    }
    let f = |w: f64| g_at(w).map(|g| g - target_g).unwrap_or(f64::NAN);
    numeric::bisect(&f, lo, hi, 1e-10)
}

/// Assemble the full single-mode parameter set on the red sideband
/// (Delta = omega_m).
pub fn mode_params(
    kind: ModeKind,
    tweezer: &TweezerParams,
    cavity: &CavityParams,
    geom: &EllipsoidGeometry,
    pol: &Polarizability,
) -> Result<ModeParams> {
    let (mass, inertia) = geom.mass_and_inertia();
    let (omega_m, zpf, g_disp, g_cs) = match kind {
        ModeKind::Com => {
            let omega = com_frequency(tweezer, geom, pol)?;
            let zpf = zero_point_amplitude(mass, omega)?;
            let (gd, gc) = couplings_com(tweezer, cavity, pol, zpf);
            (omega, zpf, gd, gc)
        }
        ModeKind::Torsional => {
            let omega = torsional_frequency(tweezer, geom, pol)?;
            let zpf = zero_point_amplitude(inertia, omega)?;
            let (gd, gc) = couplings_torsional(tweezer, cavity, pol, zpf);
            (omega, zpf, gd, gc)
        }
    };
    Ok(ModeParams {
        kind,
        omega_m,
        g_disp,
        g_cs,
        zpf,
        omega_c_shifted: shifted_cavity_frequency(kind, cavity, pol),
        delta: omega_m,
    })
}
