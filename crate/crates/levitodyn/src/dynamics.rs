//! Linearized Langevin dynamics of one cavity mode coupled to one
//! mechanical mode: drift and diffusion matrices, stability, and the
//! steady-state intracavity covariance matrix.

use nalgebra::{DMatrix, Matrix4, SMatrix};

use crate::gaussian_tools::CovMatrix;
use crate::trap_cavity::ModeParams;
use crate::{Error, Result};

/// Eigenvalue real parts must be below -STABILITY_MARGIN * max|A| to count
/// as stable; guards against marginal models in sweeps.
const STABILITY_MARGIN: f64 = 1e-12;

/// Drift and diffusion of the quadrature vector (Q, P, X, Y) -
/// mechanical position/momentum, then cavity amplitude/phase.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearModel {
    /// Mechanical angular frequency [rad/s].
    pub omega_m: f64,
    /// Mechanical energy decay rate [rad/s].
    pub gamma: f64,
    /// Coherent-scattering coupling [rad/s].
    pub g: f64,
    /// Cavity detuning [rad/s].
    pub delta: f64,
    /// Cavity energy decay rate [rad/s].
    pub kappa: f64,
    /// Thermal occupation of the mechanical bath.
    pub n_bar: f64,
    drift: Matrix4<f64>,
    diffusion: Matrix4<f64>,
}

/// Construct the linear model.
///
/// Drift rows: (-gamma/2, omega_m, 0, 0), (-omega_m, -gamma/2, 2g, 0),
/// (0, 0, -kappa/2, delta), (2g, 0, -delta, -kappa/2).
/// Diffusion: diag(gamma (2 n_bar + 1)/2 twice, kappa/2 twice), under the
/// vacuum-variance-1/2 convention.
pub fn build_model(
    omega_m: f64,
    gamma: f64,
    g: f64,
    delta: f64,
    kappa: f64,
    n_bar: f64,
) -> Result<LinearModel> {
    if !(omega_m > 0.0 && omega_m.is_finite()) {
        return Err(Error::InvalidParameter(
            "mechanical frequency must be positive".into(),
        ));
    }
    if !(kappa > 0.0 && kappa.is_finite()) {
        return Err(Error::InvalidParameter("cavity decay must be positive".into()));
    }
    if !(gamma >= 0.0 && gamma.is_finite()) {
        return Err(Error::InvalidParameter(
            "mechanical decay must be non-negative".into(),
        ));
    }
    if !(n_bar >= 0.0 && n_bar.is_finite()) {
        return Err(Error::InvalidParameter(
            "thermal occupation must be non-negative".into(),
        ));
    }
    if !(g.is_finite() && delta.is_finite()) {
        return Err(Error::InvalidParameter("coupling and detuning must be finite".into()));
    }
    let drift = Matrix4::new(
        -gamma / 2.0,
        omega_m,
        0.0,
        0.0,
        -omega_m,
        -gamma / 2.0,
        2.0 * g,
        0.0,
        0.0,
        0.0,
        -kappa / 2.0,
        delta,
        2.0 * g,
        0.0,
        -delta,
        -kappa / 2.0,
    );
    let mech = gamma * (2.0 * n_bar + 1.0) / 2.0;
    let diffusion = Matrix4::from_diagonal(&nalgebra::Vector4::new(
        mech,
        mech,
        kappa / 2.0,
        kappa / 2.0,
    ));
    Ok(LinearModel {
        omega_m,
        gamma,
        g,
        delta,
        kappa,
        n_bar,
        drift,
        diffusion,
    })
}

impl LinearModel {
    /// Model from derived mode parameters, using the coherent-scattering
    /// coupling and the mode's detuning.
    pub fn from_mode(mode: &ModeParams, gamma: f64, n_bar: f64, kappa: f64) -> Result<Self> {
        build_model(mode.omega_m, gamma, mode.g_cs, mode.delta, kappa, n_bar)
    }

    pub fn drift(&self) -> &Matrix4<f64> {
        &self.drift
    }

    pub fn diffusion(&self) -> &Matrix4<f64> {
        &self.diffusion
    }

    /// Routh-Hurwitz stability: all drift eigenvalues strictly in the left
    /// half plane.
    pub fn is_stable(&self) -> bool {
        let scale = self.drift.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let margin = STABILITY_MARGIN * scale;
        self.drift
            .complex_eigenvalues()
            .iter()
            .all(|z| z.re < -margin)
    }

    /// Steady-state covariance matrix, the unique solution of
    /// A V + V A^T + D = 0 for a stable drift.
    pub fn steady_state_cm(&self) -> Result<CovMatrix> {
        if !self.is_stable() {
            return Err(Error::UnstableModel);
        }
        let v = solve_lyapunov(&self.drift, &self.diffusion)?;
        let residual = self.drift * v + v * self.drift.transpose() + self.diffusion;
        let d_norm = self.diffusion.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let r_norm = residual.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        if r_norm > 1e-12 * d_norm {
            return Err(Error::Conditioning(format!(
                "Lyapunov residual {r_norm:.3e} exceeds 1e-12 of diffusion scale {d_norm:.3e}"
            )));
        }
        CovMatrix::new(DMatrix::from_iterator(4, 4, v.iter().copied()))?
            .with_labels(&["mechanical", "cavity"])
    }
}

/// Solve A V + V A^T + Q = 0 by Kronecker vectorization,
/// (I (x) A + A (x) I) vec(V) = -vec(Q). Sizes here are fixed at 4x4, so
/// the dense 16x16 solve is exact and cheap.
pub fn solve_lyapunov(a: &Matrix4<f64>, q: &Matrix4<f64>) -> Result<Matrix4<f64>> {
    let mut k = SMatrix::<f64, 16, 16>::zeros();
    // vec is column-major: vec(AV) = (I (x) A) vec V, vec(V A^T) = (A (x) I) vec V.
    for col in 0..4 {
        for (i, j) in index_pairs() {
            k[(4 * col + i, 4 * col + j)] += a[(i, j)];
        }
    }
    for (i, j) in index_pairs() {
        for d in 0..4 {
            k[(4 * i + d, 4 * j + d)] += a[(i, j)];
        }
    }
    let rhs = SMatrix::<f64, 16, 1>::from_iterator(q.iter().map(|x| -x));
    let lu = k.lu();
    let sol = lu
        .solve(&rhs)
        .ok_or_else(|| Error::Conditioning("singular Lyapunov system".into()))?;
    let mut v = Matrix4::zeros();
    for col in 0..4 {
        for row in 0..4 {
            v[(row, col)] = sol[4 * col + row];
        }
    }
    // Exact solutions are symmetric; remove roundoff asymmetry.
    Ok((v + v.transpose()) * 0.5)
}

fn index_pairs() -> impl Iterator<Item = (usize, usize)> {
    (0..4).flat_map(|i| (0..4).map(move |j| (i, j)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn random_stable_model(rng: &mut StdRng) -> LinearModel {
        loop {
            let omega = rng.random_range(0.5..2.0);
            let gamma = rng.random_range(1e-4..0.5);
            let kappa = rng.random_range(0.5..10.0);
            let g = rng.random_range(0.0..0.5) * omega;
            let delta = rng.random_range(0.2..2.0) * omega;
            let n_bar = rng.random_range(0.0..50.0);
            let m = build_model(omega, gamma, g, delta, kappa, n_bar).unwrap();
            if m.is_stable() {
                return m;
            }
        }
    }

    #[test]
    fn drift_matches_printed_matrix() {
        let m = build_model(1.0, 0.1, 0.2, 1.0, 2.0, 0.0).unwrap();
        let expect = Matrix4::new(
            -0.05, 1.0, 0.0, 0.0, //
            -1.0, -0.05, 0.4, 0.0, //
            0.0, 0.0, -1.0, 1.0, //
            0.4, 0.0, -1.0, -1.0,
        );
        assert_relative_eq!(m.drift(), &expect, max_relative = 1e-15);
        let d = Matrix4::from_diagonal(&nalgebra::Vector4::new(0.05, 0.05, 1.0, 1.0));
        assert_relative_eq!(m.diffusion(), &d, max_relative = 1e-15);
    }

    #[test]
    fn decoupled_model_is_block_diagonal() {
        let m = build_model(1.0, 0.1, 0.0, 1.0, 2.0, 0.0).unwrap();
        let a = m.drift();
        for i in 0..2 {
            for j in 2..4 {
                assert_eq!(a[(i, j)], 0.0);
                assert_eq!(a[(j, i)], 0.0);
            }
        }
        assert!(m.is_stable());
    }

    #[test]
    fn blue_sideband_with_strong_coupling_is_unstable() {
        let m = build_model(1.0, 1e-3, 0.6, -1.0, 0.05, 0.0).unwrap();
        assert!(!m.is_stable());
        assert!(matches!(m.steady_state_cm(), Err(Error::UnstableModel)));
        let max_re = m
            .drift()
            .complex_eigenvalues()
            .iter()
            .map(|z| z.re)
            .fold(f64::NEG_INFINITY, f64::max);
        assert!(max_re > 0.0);
    }

    #[test]
    fn red_sideband_bad_cavity_is_stable() {
        let m = build_model(1.0, 1e-6, 0.4, 1.0, 3.0, 5e7).unwrap();
        assert!(m.is_stable());
    }

    #[test]
    fn decoupled_vacuum_steady_state() {
        let m = build_model(1.0, 0.2, 0.0, 1.0, 2.0, 0.0).unwrap();
        let v = m.steady_state_cm().unwrap();
        for i in 0..4 {
            for j in 0..4 {
                let expect = if i == j { 0.5 } else { 0.0 };
                assert_abs_diff_eq!(v.matrix()[(i, j)], expect, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn decoupled_thermal_steady_state() {
        let n_bar = 7.25;
        let m = build_model(1.0, 0.2, 0.0, 1.0, 2.0, n_bar).unwrap();
        let v = m.steady_state_cm().unwrap();
        let mech = (2.0 * n_bar + 1.0) / 2.0;
        assert_relative_eq!(v.matrix()[(0, 0)], mech, max_relative = 1e-12);
        assert_relative_eq!(v.matrix()[(1, 1)], mech, max_relative = 1e-12);
        assert_relative_eq!(v.matrix()[(2, 2)], 0.5, max_relative = 1e-12);
        assert_abs_diff_eq!(v.matrix()[(0, 1)], 0.0, epsilon = 1e-12);
    }

    #[test]
    fn lyapunov_residual_on_random_stable_models() {
        let mut rng = StdRng::seed_from_u64(21);
        for _ in 0..100 {
            let m = random_stable_model(&mut rng);
            let v = m.steady_state_cm().unwrap();
            let v4 = Matrix4::from_iterator(v.matrix().iter().copied());
            let res = m.drift() * v4 + v4 * m.drift().transpose() + m.diffusion();
            let d_norm = m.diffusion().iter().fold(0.0f64, |a, x| a.max(x.abs()));
            let r_norm = res.iter().fold(0.0f64, |a, x| a.max(x.abs()));
            assert!(r_norm <= 1e-12 * d_norm, "residual {r_norm} vs {d_norm}");
        }
    }

    #[test]
    fn steady_state_matches_propagator_integral() {
        // Independent route: V = Int_0^inf exp(A t) D exp(A^T t) dt by
        // quadrature of matrix exponentials.
        let mut rng = StdRng::seed_from_u64(22);
        for _ in 0..10 {
            let m = random_stable_model(&mut rng);
            let v = m.steady_state_cm().unwrap();
            let v4 = Matrix4::from_iterator(v.matrix().iter().copied());

            let decay = m
                .drift()
                .complex_eigenvalues()
                .iter()
                .map(|z| -z.re)
                .fold(f64::INFINITY, f64::min);
            let t_end = 50.0 / decay;
            let f = |t: f64| {
                let e = (m.drift() * t).exp();
                e * m.diffusion() * e.transpose()
            };
            let pts: Vec<f64> = (0..=40).map(|k| t_end * k as f64 / 40.0).collect();
            let oracle: Matrix4<f64> =
                crate::numeric::integrate_adaptive(&f, &pts, 1e-9, 0.0, 8000).unwrap();
            let scale = v4.iter().fold(0.0f64, |a, x| a.max(x.abs()));
            let diff = (oracle - v4).iter().fold(0.0f64, |a, x| a.max(x.abs()));
            assert!(diff <= 1e-6 * scale, "integral oracle off by {diff} at scale {scale}");
        }
    }

    #[test]
    fn steady_states_are_physical() {
        let mut rng = StdRng::seed_from_u64(23);
        for _ in 0..50 {
            let m = random_stable_model(&mut rng);
            let v = m.steady_state_cm().unwrap();
            let nu = v.min_symplectic_eigenvalue().unwrap();
            assert!(nu >= 0.5 - 1e-9, "nu_min = {nu}");
        }
    }

    #[test]
    fn euler_maruyama_reproduces_steady_variances() {
        // Classical stochastic integration of the same linear SDE must
        // reproduce the Lyapunov diagonal within Monte Carlo error.
        let m = build_model(1.0, 0.2, 0.3, 1.0, 2.0, 0.5).unwrap();
        let v = m.steady_state_cm().unwrap();

        let dt = 5e-4;
        let steps = 20_000_000usize;
        let burn = 200_000usize;
        let mut rng = StdRng::seed_from_u64(24);
        let mut u = nalgebra::Vector4::<f64>::zeros();
        let noise_amp: Vec<f64> = (0..4)
            .map(|i| (m.diffusion()[(i, i)] * dt).sqrt())
            .collect();
        let mut acc = nalgebra::Vector4::<f64>::zeros();
        let mut count = 0usize;
        let normal = |r: &mut StdRng| -> f64 {
            // Box-Muller.
            let u1: f64 = r.random_range(1e-12..1.0);
            let u2: f64 = r.random_range(0.0..std::f64::consts::TAU);
            (-2.0 * u1.ln()).sqrt() * u2.cos()
        };
        for step in 0..steps {
            let drift = m.drift() * u;
            for i in 0..4 {
                u[i] += drift[i] * dt + noise_amp[i] * normal(&mut rng);
            }
            if step >= burn {
                for i in 0..4 {
                    acc[i] += u[i] * u[i];
                }
                count += 1;
            }
        }
        // Integrated autocorrelation time ~ 1/gamma_eff; relative MC error
        // on a variance ~ sqrt(2 tau / T_total).
        let t_total = (steps - burn) as f64 * dt;
        let tau = 1.0 / 0.2;
        let rel_sigma = (2.0 * tau / t_total).sqrt();
        for i in 0..4 {
            let sampled = acc[i] / count as f64;
            let expect = v.matrix()[(i, i)];
            let rel = (sampled - expect).abs() / expect;
            assert!(
                rel < 3.0 * rel_sigma + 0.01,
                "quadrature {i}: sampled {sampled} vs {expect} (rel {rel}, 3 sigma {})",
                3.0 * rel_sigma
            );
        }
    }
}
