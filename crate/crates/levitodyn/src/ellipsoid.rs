//! Dielectric response of a levitated nano-ellipsoid: depolarization
//! factors, axis polarizabilities, the rotated polarizability tensor, and
//! mass / moment of inertia.

use std::f64::consts::PI;

use nalgebra::Matrix3;

use crate::constants::VACUUM_PERMITTIVITY;
use crate::numeric;
use crate::{Error, Result};

/// Below this eccentricity the closed-form depolarization factor is
/// evaluated by its Taylor series to avoid 0/0 cancellation.
const ECCENTRICITY_SERIES_CUTOFF: f64 = 1e-4;

/// Semiaxes and material density of the particle. Semiaxes are ordered
/// a >= b >= c.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EllipsoidGeometry {
    a: f64,
    b: f64,
    c: f64,
    density: f64,
}

impl EllipsoidGeometry {
    /// New geometry with semiaxes in meters and density in kg/m^3.
    pub fn new(a: f64, b: f64, c: f64, density: f64) -> Result<Self> {
        if !(a > 0.0 && b > 0.0 && c > 0.0 && a.is_finite() && b.is_finite() && c.is_finite()) {
            return Err(Error::InvalidParameter(
                "semiaxes must be positive and finite".into(),
            ));
        }
        if !(a >= b && b >= c) {
            return Err(Error::InvalidParameter(
                "semiaxes must be ordered a >= b >= c".into(),
            ));
        }
        if !(density > 0.0 && density.is_finite()) {
            return Err(Error::InvalidParameter("density must be positive".into()));
        }
        Ok(Self { a, b, c, density })
    }

    /// Prolate spheroid (b = c).
    pub fn prolate(a: f64, b: f64, density: f64) -> Result<Self> {
        Self::new(a, b, b, density)
    }

    pub fn semi_major(&self) -> f64 {
        self.a
    }
    pub fn semi_middle(&self) -> f64 {
        self.b
    }
    pub fn semi_minor(&self) -> f64 {
        self.c
    }
    pub fn density(&self) -> f64 {
        self.density
    }

    pub fn is_prolate(&self) -> bool {
        self.b == self.c
    }

    /// Eccentricity e = sqrt(1 - b^2/a^2) of a prolate spheroid.
    pub fn eccentricity(&self) -> Result<f64> {
        if !self.is_prolate() {
            return Err(Error::InvalidParameter(
                "eccentricity is defined here for prolate spheroids (b = c)".into(),
            ));
        }
        let ratio = self.b / self.a;
        Ok((1.0 - ratio * ratio).max(0.0).sqrt())
    }

    /// Mass m = (4/3) pi a b c rho and moment of inertia I = m (a^2 + b^2)/5
    /// for rotation of the long axis.
    pub fn mass_and_inertia(&self) -> (f64, f64) {
        let mass = 4.0 / 3.0 * PI * self.a * self.b * self.c * self.density;
        let inertia = mass * (self.a * self.a + self.b * self.b) / 5.0;
        (mass, inertia)
    }

    pub fn mass(&self) -> f64 {
        self.mass_and_inertia().0
    }

    pub fn inertia(&self) -> f64 {
        self.mass_and_inertia().1
    }
}

/// Static polarizabilities along the three principal axes, together with
/// the depolarization factors and the relative permittivity they were
/// computed from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Polarizability {
    /// Polarizability along the long axis [C m^2 / V].
    pub alpha_a: f64,
    pub alpha_b: f64,
    pub alpha_c: f64,
    /// Dimensionless relative permittivity of the material.
    pub rel_permittivity: f64,
    /// Depolarization factors (L_a, L_b, L_c); they sum to 1.
    pub depolarization: [f64; 3],
}

/// Closed-form long-axis depolarization factor of a prolate spheroid,
/// L_a = ((1 - e^2)/e^2) * (ln((1+e)/(1-e))/(2e) - 1).
fn depolarization_prolate_long(e: f64) -> f64 {
    if e < ECCENTRICITY_SERIES_CUTOFF {
        // L_a = 1/3 - sum_{k>=1} 2 e^{2k} / ((2k+1)(2k+3))
        let e2 = e * e;
        return 1.0 / 3.0 - 2.0 * e2 / 15.0 - 2.0 * e2 * e2 / 35.0 - 2.0 * e2 * e2 * e2 / 63.0;
    }
    let e2 = e * e;
    (1.0 - e2) / e2 * (((1.0 + e) / (1.0 - e)).ln() / (2.0 * e) - 1.0)
}

/// Depolarization factors (L_a, L_b, L_c). The prolate case (b = c) uses
/// the closed form; the general triaxial case integrates
/// L_j = (abc/2) Int_0^inf ds / ((s + j^2) sqrt((s+a^2)(s+b^2)(s+c^2)))
/// by adaptive quadrature after the substitution s = a^2 tan^2 u.
pub fn depolarization_factors(geom: &EllipsoidGeometry) -> Result<[f64; 3]> {
    if geom.is_prolate() {
        let e = geom.eccentricity()?;
        let la = depolarization_prolate_long(e);
        let lb = 0.5 * (1.0 - la);
        return Ok([la, lb, lb]);
    }
    let l = depolarization_factors_quadrature(geom)?;
    let sum = l[0] + l[1] + l[2];
    if (sum - 1.0).abs() > 1e-10 {
        return Err(Error::QuadratureNonConvergence {
            requested: 1e-10,
            achieved: (sum - 1.0).abs(),
        });
    }
    Ok(l)
}

/// Depolarization factors by direct quadrature for any valid geometry.
/// This is the generic route; `depolarization_factors` prefers the closed
/// form when one exists.
pub fn depolarization_factors_quadrature(geom: &EllipsoidGeometry) -> Result<[f64; 3]> {
    let (a, b, c) = (geom.a, geom.b, geom.c);
    let axes = [a, b, c];
    let mut l = [0.0; 3];
    for (k, &axis) in axes.iter().enumerate() {
        // s = a^2 tan^2 u maps [0, inf) onto [0, pi/2); ds = 2 a^2 tan u sec^2 u du
        // and sqrt(s + a^2) = a sec u.
        let integrand = |u: f64| {
            let t = u.tan();
            let s = a * a * t * t;
            let sec = 1.0 / u.cos();
            let num = a * b * c * a * a * t * sec * sec;
            let den = (s + axis * axis) * (a * sec) * ((s + b * b) * (s + c * c)).sqrt();
            num / den
        };
        l[k] = numeric::integrate_adaptive(
            &integrand,
            &[0.0, 0.5, 1.2, std::f64::consts::FRAC_PI_2],
            1e-12,
            1e-14,
            4000,
        )?;
    }
    Ok(l)
}

/// Axis polarizabilities from the depolarization factors,
/// alpha_j = 4 pi a b c eps0 (eps_r - 1) / (3 + 3 L_j (eps_r - 1)),
/// with `rel_permittivity` the dimensionless material permittivity.
pub fn axis_polarizabilities(
    geom: &EllipsoidGeometry,
    rel_permittivity: f64,
) -> Result<Polarizability> {
    if !(rel_permittivity > 0.0 && rel_permittivity.is_finite()) {
        return Err(Error::InvalidParameter(
            "relative permittivity must be positive".into(),
        ));
    }
    let depol = depolarization_factors(geom)?;
    let chi = rel_permittivity - 1.0;
    let volume_term = 4.0 * PI * geom.a * geom.b * geom.c * VACUUM_PERMITTIVITY;
    let mut alpha = [0.0; 3];
    for (j, &lj) in depol.iter().enumerate() {
        let denom = 3.0 + 3.0 * lj * chi;
        if denom <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "polarizability denominator non-positive (L = {lj}, eps_r = {rel_permittivity})"
            )));
        }
        alpha[j] = volume_term * chi / denom;
    }
    Ok(Polarizability {
        alpha_a: alpha[0],
        alpha_b: alpha[1],
        alpha_c: alpha[2],
        rel_permittivity,
        depolarization: depol,
    })
}

impl Polarizability {
    /// Anisotropy alpha_a - alpha_b driving the torsional trap.
    pub fn anisotropy(&self) -> f64 {
        self.alpha_a - self.alpha_b
    }

    pub fn as_diagonal(&self) -> Matrix3<f64> {
        Matrix3::from_diagonal(&nalgebra::Vector3::new(
            self.alpha_a,
            self.alpha_b,
            self.alpha_c,
        ))
    }
}

/// Polarizability tensor in the lab frame after rotating the particle by
/// Euler angles (theta about y, then phi about z): alpha' = R^-1 alpha R.
pub fn rotated_polarizability(pol: &Polarizability, theta: f64, phi: f64) -> Matrix3<f64> {
    let (st, ct) = theta.sin_cos();
    let (sp, cp) = phi.sin_cos();
    let r_theta = Matrix3::new(ct, 0.0, -st, 0.0, 1.0, 0.0, st, 0.0, ct);
    let r_phi = Matrix3::new(cp, sp, 0.0, -sp, cp, 0.0, 0.0, 0.0, 1.0);
    let r = r_theta * r_phi;
    r.transpose() * pol.as_diagonal() * r
}
