//! Covariance-matrix utilities for Gaussian states: mode selection,
//! symplectic spectra, physicality checks, logarithmic negativity, and
//! random-state generators for testing.
//!
//! Quadratures are ordered (q1, p1, q2, p2, ...) and the vacuum variance
//! is 1/2; a state is physical iff every symplectic eigenvalue is >= 1/2.

use nalgebra::{DMatrix, Matrix2, SMatrix};
use rand::Rng;

use crate::constants::VACUUM_VARIANCE;
use crate::{Error, Result};

/// Pairs of symplectic eigenvalues closer than this (relative) are merged.
const DEGENERACY_TOL: f64 = 1e-9;

/// Symmetrized covariance matrix of N bosonic modes.
#[derive(Debug, Clone, PartialEq)]
pub struct CovMatrix {
    mat: DMatrix<f64>,
    labels: Vec<String>,
}

impl CovMatrix {
    /// Wrap a 2N x 2N matrix. Asymmetry beyond 1e-9 (relative to the
    /// largest entry) is rejected; smaller asymmetry is symmetrized away.
    pub fn new(mat: DMatrix<f64>) -> Result<Self> {
        let n = mat.nrows();
        if n == 0 || !n.is_multiple_of(2) || mat.ncols() != n {
            return Err(Error::InvalidParameter(
                "covariance matrix must be square with even dimension".into(),
            ));
        }
        let scale = mat.iter().fold(0.0f64, |m, x| m.max(x.abs())).max(1e-300);
        let mut asym = 0.0f64;
        for i in 0..n {
            for j in (i + 1)..n {
                asym = asym.max((mat[(i, j)] - mat[(j, i)]).abs());
            }
        }
        if asym > 1e-9 * scale {
            return Err(Error::Conditioning(format!(
                "covariance matrix asymmetry {asym:.3e} exceeds 1e-9 of scale {scale:.3e}"
            )));
        }
        let sym = (&mat + mat.transpose()) * 0.5;
        let labels = (0..n / 2).map(|k| format!("mode{k}")).collect();
        Ok(Self { mat: sym, labels })
    }

    /// N-mode vacuum, V = (1/2) I.
    pub fn vacuum(n_modes: usize) -> Self {
        let dim = 2 * n_modes;
        Self {
            mat: DMatrix::identity(dim, dim) * VACUUM_VARIANCE,
            labels: (0..n_modes).map(|k| format!("mode{k}")).collect(),
        }
    }

    pub fn with_labels(mut self, labels: &[&str]) -> Result<Self> {
        if labels.len() != self.n_modes() {
            return Err(Error::InvalidParameter(
                "one label per mode is required".into(),
            ));
        }
        self.labels = labels.iter().map(|s| s.to_string()).collect();
        Ok(self)
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn n_modes(&self) -> usize {
        self.mat.nrows() / 2
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.mat
    }

    /// Partial trace onto the listed modes, preserving the given order.
    pub fn select_modes(&self, modes: &[usize]) -> Result<CovMatrix> {
        let n = self.n_modes();
        for (k, &m) in modes.iter().enumerate() {
            if m >= n {
                return Err(Error::ModeIndex {
                    index: m,
                    n_modes: n,
                });
            }
            if modes[..k].contains(&m) {
                return Err(Error::InvalidParameter(format!(
                    "duplicate mode index {m} in selection"
                )));
            }
        }
        let dim = 2 * modes.len();
        let mut out = DMatrix::zeros(dim, dim);
        for (bi, &mi) in modes.iter().enumerate() {
            for (bj, &mj) in modes.iter().enumerate() {
                for a in 0..2 {
                    for b in 0..2 {
                        out[(2 * bi + a, 2 * bj + b)] = self.mat[(2 * mi + a, 2 * mj + b)];
                    }
                }
            }
        }
        let labels: Vec<String> = modes.iter().map(|&m| self.labels[m].clone()).collect();
        let mut cm = CovMatrix::new(out)?;
        cm.labels = labels;
        Ok(cm)
    }

    /// Momentum-sign flip of one mode (the partial transpose at CM level).
    pub fn partial_transpose(&self, mode: usize) -> Result<CovMatrix> {
        let n = self.n_modes();
        if mode >= n {
            return Err(Error::ModeIndex {
                index: mode,
                n_modes: n,
            });
        }
        let mut m = self.mat.clone();
        let p = 2 * mode + 1;
        for k in 0..self.dim() {
            m[(p, k)] = -m[(p, k)];
            m[(k, p)] = -m[(k, p)];
        }
        let mut cm = CovMatrix::new(m)?;
        cm.labels = self.labels.clone();
        Ok(cm)
    }

    /// Symplectic eigenvalues: the N distinct moduli of the eigenvalues of
    /// i Omega V, sorted ascending. Requires a positive-definite matrix.
    pub fn symplectic_eigenvalues(&self) -> Result<Vec<f64>> {
        if self.mat.clone().cholesky().is_none() {
            return Err(Error::InvalidParameter(
                "symplectic spectrum requires a positive-definite matrix".into(),
            ));
        }
        let omega_v = symplectic_form(self.n_modes()) * &self.mat;
        let eig = omega_v.complex_eigenvalues();
        let mut moduli: Vec<f64> = eig.iter().map(|z| z.norm()).collect();
        moduli.sort_by(|x, y| x.total_cmp(y));
        let scale = moduli.last().copied().unwrap_or(0.0).max(1e-300);
        let mut out = Vec::with_capacity(self.n_modes());
        for pair in moduli.chunks(2) {
            if pair.len() != 2 || (pair[0] - pair[1]).abs() > DEGENERACY_TOL * scale {
                return Err(Error::Conditioning(
                    "symplectic spectrum does not split into degenerate pairs".into(),
                ));
            }
            out.push(0.5 * (pair[0] + pair[1]));
        }
        Ok(out)
    }

    pub fn min_symplectic_eigenvalue(&self) -> Result<f64> {
        Ok(self.symplectic_eigenvalues()?[0])
    }

    /// Physicality: every symplectic eigenvalue >= 1/2 - tol.
    pub fn is_physical(&self, tol: f64) -> bool {
        match self.symplectic_eigenvalues() {
            Ok(nu) => nu[0] >= VACUUM_VARIANCE - tol,
            Err(_) => false,
        }
    }

    /// Congruence transform V -> S V S^T.
    pub fn transformed(&self, s: &DMatrix<f64>) -> Result<CovMatrix> {
        if s.nrows() != self.dim() || s.ncols() != self.dim() {
            return Err(Error::InvalidParameter(
                "symplectic transform has wrong dimension".into(),
            ));
        }
        CovMatrix::new(s * &self.mat * s.transpose())
    }
}

/// Block-diagonal symplectic form, Omega = diag(J, ..., J) with
/// J = [[0, 1], [-1, 0]].
pub fn symplectic_form(n_modes: usize) -> DMatrix<f64> {
    let mut omega = DMatrix::zeros(2 * n_modes, 2 * n_modes);
    for k in 0..n_modes {
        omega[(2 * k, 2 * k + 1)] = 1.0;
        omega[(2 * k + 1, 2 * k)] = -1.0;
    }
    omega
}

/// Two-mode covariance matrix with block view V = [[A1, A3], [A3^T, A2]].
#[derive(Debug, Clone, PartialEq)]
pub struct PairCm {
    cm: CovMatrix,
}

impl PairCm {
    pub fn new(cm: CovMatrix) -> Result<Self> {
        if cm.n_modes() != 2 {
            return Err(Error::InvalidParameter(
                "a pair covariance matrix has exactly two modes".into(),
            ));
        }
        Ok(Self { cm })
    }

    pub fn from_blocks(a1: Matrix2<f64>, a2: Matrix2<f64>, a3: Matrix2<f64>) -> Result<Self> {
        let mut m = DMatrix::zeros(4, 4);
        m.view_mut((0, 0), (2, 2)).copy_from(&a1);
        m.view_mut((2, 2), (2, 2)).copy_from(&a2);
        m.view_mut((0, 2), (2, 2)).copy_from(&a3);
        m.view_mut((2, 0), (2, 2)).copy_from(&a3.transpose());
        Self::new(CovMatrix::new(m)?)
    }

    pub fn cm(&self) -> &CovMatrix {
        &self.cm
    }

    pub fn block_a1(&self) -> Matrix2<f64> {
        self.cm.mat.fixed_view::<2, 2>(0, 0).into()
    }
    pub fn block_a2(&self) -> Matrix2<f64> {
        self.cm.mat.fixed_view::<2, 2>(2, 2).into()
    }
    pub fn block_a3(&self) -> Matrix2<f64> {
        self.cm.mat.fixed_view::<2, 2>(0, 2).into()
    }

    /// Logarithmic negativity En = max(0, -ln 2 eta), where eta is the
    /// smallest partially transposed symplectic eigenvalue,
    /// eta^2 = (S - sqrt(S^2 - 4 det V)) / 2 with
    /// S = det A1 + det A2 - 2 det A3. The pair is entangled iff eta < 1/2.
    pub fn log_negativity(&self) -> Result<f64> {
        let a1 = self.block_a1().determinant();
        let a2 = self.block_a2().determinant();
        let a3 = self.block_a3().determinant();
        let det_v: f64 = SMatrix::<f64, 4, 4>::from_iterator(self.cm.mat.iter().copied())
            .determinant();
        let sigma = a1 + a2 - 2.0 * a3;
        let mut disc = sigma * sigma - 4.0 * det_v;
        let scale = (sigma * sigma).max(1.0);
        if disc < -1e-12 * scale {
            return Err(Error::Conditioning(format!(
                "negative discriminant {disc:.3e} in log-negativity"
            )));
        }
        disc = disc.max(0.0);
        let root = disc.sqrt();
        // Rationalized form avoids cancellation when sigma >> root gap.
        let eta_sq = if sigma > 0.0 && det_v > 0.0 {
            2.0 * det_v / (sigma + root)
        } else {
            0.5 * (sigma - root)
        };
        if eta_sq < -1e-12 * scale {
            return Err(Error::Conditioning(format!(
                "negative squared eigenvalue {eta_sq:.3e} in log-negativity"
            )));
        }
        let eta = eta_sq.max(0.0).sqrt();
        if eta == 0.0 {
            return Err(Error::Conditioning(
                "vanishing partially transposed symplectic eigenvalue".into(),
            ));
        }
        Ok((-(2.0 * eta).ln()).max(0.0))
    }
}

/// Logarithmic negativity between two modes of a larger state.
pub fn log_negativity_of_pair(cm: &CovMatrix, mode_i: usize, mode_j: usize) -> Result<f64> {
    PairCm::new(cm.select_modes(&[mode_i, mode_j])?)?.log_negativity()
}

/// Two-mode squeezed vacuum with squeezing parameter r:
/// A1 = A2 = cosh(2r)/2 I, A3 = sinh(2r)/2 diag(1, -1). En = 2r.
pub fn two_mode_squeezed_vacuum(r: f64) -> PairCm {
    let ch = (2.0 * r).cosh() * VACUUM_VARIANCE;
    let sh = (2.0 * r).sinh() * VACUUM_VARIANCE;
    PairCm::from_blocks(
        Matrix2::identity() * ch,
        Matrix2::identity() * ch,
        Matrix2::new(sh, 0.0, 0.0, -sh),
    )
    .expect("TMSV blocks are symmetric")
}

/// Direct sum of two states (no correlations between them).
pub fn direct_sum(a: &CovMatrix, b: &CovMatrix) -> CovMatrix {
    let (da, db) = (a.dim(), b.dim());
    let mut m = DMatrix::zeros(da + db, da + db);
    m.view_mut((0, 0), (da, da)).copy_from(a.matrix());
    m.view_mut((da, da), (db, db)).copy_from(b.matrix());
    let mut cm = CovMatrix::new(m).expect("direct sum of symmetric matrices");
    cm.labels = a
        .labels
        .iter()
        .chain(b.labels.iter())
        .cloned()
        .collect();
    cm
}

/// Random single-mode symplectic, rotation * squeeze * rotation.
pub fn random_local_symplectic<R: Rng>(rng: &mut R, max_squeeze: f64) -> Matrix2<f64> {
    let rot = |t: f64| Matrix2::new(t.cos(), t.sin(), -t.sin(), t.cos());
    let t1 = rng.random_range(0.0..std::f64::consts::TAU);
    let t2 = rng.random_range(0.0..std::f64::consts::TAU);
    let r = rng.random_range(-max_squeeze..max_squeeze);
    rot(t1) * Matrix2::new(r.exp(), 0.0, 0.0, (-r).exp()) * rot(t2)
}

/// Random N-mode symplectic built from local operations, beam splitters
/// and two-mode squeezers.
pub fn random_symplectic<R: Rng>(rng: &mut R, n_modes: usize, max_squeeze: f64) -> DMatrix<f64> {
    let dim = 2 * n_modes;
    let mut s = DMatrix::identity(dim, dim);
    for k in 0..n_modes {
        let local = random_local_symplectic(rng, max_squeeze);
        let mut embed = DMatrix::identity(dim, dim);
        embed.view_mut((2 * k, 2 * k), (2, 2)).copy_from(&local);
        s = embed * s;
    }
    if n_modes > 1 {
        for _ in 0..(2 * n_modes) {
            let i = rng.random_range(0..n_modes);
            let mut j = rng.random_range(0..n_modes);
            while j == i {
                j = rng.random_range(0..n_modes);
            }
            let mut embed = DMatrix::identity(dim, dim);
            if rng.random_bool(0.5) {
                // Beam splitter.
                let t = rng.random_range(0.0..std::f64::consts::TAU);
                let (c, sn) = (t.cos(), t.sin());
                for q in 0..2 {
                    embed[(2 * i + q, 2 * i + q)] = c;
                    embed[(2 * j + q, 2 * j + q)] = c;
                    embed[(2 * i + q, 2 * j + q)] = sn;
                    embed[(2 * j + q, 2 * i + q)] = -sn;
                }
            } else {
                // Two-mode squeezer.
                let r = rng.random_range(0.0..max_squeeze);
                let (ch, sh) = (r.cosh(), r.sinh());
                for q in 0..2 {
                    embed[(2 * i + q, 2 * i + q)] = ch;
                    embed[(2 * j + q, 2 * j + q)] = ch;
                }
                embed[(2 * i, 2 * j)] = sh;
                embed[(2 * j, 2 * i)] = sh;
                embed[(2 * i + 1, 2 * j + 1)] = -sh;
                embed[(2 * j + 1, 2 * i + 1)] = -sh;
            }
            s = embed * s;
        }
    }
    s
}

/// Random physical covariance matrix: symplectic transform of a thermal
/// product state with symplectic eigenvalues in [1/2, 1/2 + max_thermal].
pub fn random_physical_cm<R: Rng>(
    rng: &mut R,
    n_modes: usize,
    max_squeeze: f64,
    max_thermal: f64,
) -> CovMatrix {
    let dim = 2 * n_modes;
    let mut core = DMatrix::zeros(dim, dim);
    for k in 0..n_modes {
        let nu = VACUUM_VARIANCE + rng.random_range(0.0..max_thermal);
        core[(2 * k, 2 * k)] = nu;
        core[(2 * k + 1, 2 * k + 1)] = nu;
    }
    let s = random_symplectic(rng, n_modes, max_squeeze);
    CovMatrix::new(&s * core * s.transpose()).expect("congruence preserves symmetry")
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use rand::rngs::StdRng;
    use rand::SeedableRng;

    #[test]
    fn select_all_is_identity() {
        let mut rng = StdRng::seed_from_u64(7);
        let v = random_physical_cm(&mut rng, 3, 0.8, 1.5);
        let w = v.select_modes(&[0, 1, 2]).unwrap();
        assert_relative_eq!(v.matrix(), w.matrix(), epsilon = 1e-15);
    }

    #[test]
    fn select_reorders_blocks() {
        let mut rng = StdRng::seed_from_u64(8);
        let v = random_physical_cm(&mut rng, 3, 0.8, 1.5);
        let w = v.select_modes(&[2, 0]).unwrap();
        assert_eq!(w.n_modes(), 2);
        assert_abs_diff_eq!(w.matrix()[(0, 0)], v.matrix()[(4, 4)], epsilon = 1e-15);
        assert_abs_diff_eq!(w.matrix()[(0, 2)], v.matrix()[(4, 0)], epsilon = 1e-15);
        assert!(v.select_modes(&[0, 3]).is_err());
        assert!(v.select_modes(&[1, 1]).is_err());
    }

    #[test]
    fn symplectic_eigenvalues_of_scaled_identity() {
        let v = CovMatrix::new(DMatrix::identity(4, 4) * 0.8).unwrap();
        let nu = v.symplectic_eigenvalues().unwrap();
        assert_eq!(nu.len(), 2);
        assert_relative_eq!(nu[0], 0.8, max_relative = 1e-12);
        assert_relative_eq!(nu[1], 0.8, max_relative = 1e-12);
    }

    #[test]
    fn tmsv_is_pure() {
        // A pure state has all symplectic eigenvalues at the vacuum value.
        let pair = two_mode_squeezed_vacuum(1.3);
        let nu = pair.cm().symplectic_eigenvalues().unwrap();
        assert_relative_eq!(nu[0], 0.5, max_relative = 1e-9);
        assert_relative_eq!(nu[1], 0.5, max_relative = 1e-9);
    }

    #[test]
    fn symplectic_eigenvalue_determinant_identity() {
        let mut rng = StdRng::seed_from_u64(9);
        for _ in 0..20 {
            let v = random_physical_cm(&mut rng, 2, 1.0, 2.0);
            let nu = v.symplectic_eigenvalues().unwrap();
            let prod: f64 = nu.iter().map(|x| x * x).product();
            let det = v.matrix().determinant();
            assert_relative_eq!(prod, det, max_relative = 1e-8);
        }
    }

    #[test]
    fn non_positive_definite_rejected() {
        let mut m = DMatrix::identity(4, 4) * 0.5;
        m[(3, 3)] = -0.1;
        let v = CovMatrix::new(m).unwrap();
        assert!(v.symplectic_eigenvalues().is_err());
        assert!(!v.is_physical(1e-9));
    }

    #[test]
    fn vacuum_is_separable() {
        let pair = PairCm::new(CovMatrix::vacuum(2)).unwrap();
        assert_eq!(pair.log_negativity().unwrap(), 0.0);
    }

    #[test]
    fn tmsv_log_negativity_closed_form() {
        for r in [0.1, 0.35, 0.7, 1.0, 1.5, 2.0] {
            let en = two_mode_squeezed_vacuum(r).log_negativity().unwrap();
            assert_abs_diff_eq!(en, 2.0 * r, epsilon = 1e-9);
        }
    }

    #[test]
    fn product_states_are_separable() {
        let mut rng = StdRng::seed_from_u64(10);
        for _ in 0..20 {
            let a = random_physical_cm(&mut rng, 1, 1.0, 2.0);
            let b = random_physical_cm(&mut rng, 1, 1.0, 2.0);
            let v = direct_sum(&a, &b);
            let en = log_negativity_of_pair(&v, 0, 1).unwrap();
            assert_eq!(en, 0.0);
        }
    }

    #[test]
    fn partial_transpose_equivalence() {
        // En from the block formula equals -ln(2 nu_min) of the explicitly
        // partially transposed matrix whenever the latter is positive.
        let mut rng = StdRng::seed_from_u64(11);
        for _ in 0..100 {
            let v = random_physical_cm(&mut rng, 2, 0.9, 1.5);
            let pair = PairCm::new(v.clone()).unwrap();
            let en = pair.log_negativity().unwrap();
            let pt = v.partial_transpose(1).unwrap();
            let nu_min = pt.min_symplectic_eigenvalue().unwrap();
            let en_pt = (-(2.0 * nu_min).ln()).max(0.0);
            assert_abs_diff_eq!(en, en_pt, epsilon = 1e-10);
        }
    }

    #[test]
    fn local_symplectic_invariance() {
        let mut rng = StdRng::seed_from_u64(12);
        for _ in 0..50 {
            let v = random_physical_cm(&mut rng, 2, 0.9, 1.5);
            let en = PairCm::new(v.clone()).unwrap().log_negativity().unwrap();
            let mut s = DMatrix::identity(4, 4);
            s.view_mut((0, 0), (2, 2))
                .copy_from(&random_local_symplectic(&mut rng, 0.8));
            s.view_mut((2, 2), (2, 2))
                .copy_from(&random_local_symplectic(&mut rng, 0.8));
            let w = v.transformed(&s).unwrap();
            let en_local = PairCm::new(w).unwrap().log_negativity().unwrap();
            assert_abs_diff_eq!(en, en_local, epsilon = 1e-10);
        }
    }

    #[test]
    fn added_noise_never_increases_entanglement() {
        let v = two_mode_squeezed_vacuum(0.8);
        let mut prev = v.log_negativity().unwrap();
        for k in 1..=8 {
            let eps = 0.05 * k as f64;
            let noisy = CovMatrix::new(v.cm().matrix() + DMatrix::identity(4, 4) * eps).unwrap();
            let en = PairCm::new(noisy).unwrap().log_negativity().unwrap();
            assert!(en <= prev + 1e-12);
            prev = en;
        }
    }

    #[test]
    fn random_states_are_physical() {
        let mut rng = StdRng::seed_from_u64(13);
        for n in 1..=4 {
            for _ in 0..10 {
                let v = random_physical_cm(&mut rng, n, 1.0, 2.0);
                assert!(v.is_physical(1e-9));
            }
        }
    }

    #[test]
    fn symplectics_satisfy_defining_relation() {
        let mut rng = StdRng::seed_from_u64(14);
        for n in 1..=3 {
            let s = random_symplectic(&mut rng, n, 1.0);
            let omega = symplectic_form(n);
            let lhs = &s * &omega * s.transpose();
            assert_relative_eq!(lhs, omega, epsilon = 1e-9);
        }
    }
}
