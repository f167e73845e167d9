//! Bell-like detection between two remote levitated systems: assembly of
//! the joint covariance matrix, fiber/detector losses, the dual-homodyne
//! conditional state of the two mechanical modes, and the swapped
//! entanglement.
//!
//! Two routes compute the conditional state. `conditioned_cm` is the
//! closed-form block expression; `conditioned_cm_oracle` builds the same
//! measurement from first principles (explicit beam-splitter symplectics,
//! vacuum ancillas for detector loss, and sequential ideal homodyne
//! conditioning). The two must agree to 1e-9; the oracle defines the
//! loss-model convention.
//!
//! Mode order of the joint matrix: (mech_A, mech_B, cav_A, cav_B), where
//! "cav" stands for the filtered output mode sent to the Bell station.
//! The station mixes the two optical modes on a transmissivity-T_r beam
//! splitter, arm 1 = -sqrt(1-T_r) c_A + sqrt(T_r) c_B (measured in X),
//! arm 2 = sqrt(T_r) c_A + sqrt(1-T_r) c_B (measured in Y).

use nalgebra::{DMatrix, Matrix2, Matrix4, Matrix4x2};

use crate::constants::VACUUM_VARIANCE;
use crate::gaussian_tools::{direct_sum, CovMatrix};
use crate::output_filter::{FilterKind, OutputCm};
use crate::{Error, Result};

/// Bell-station settings: beam-splitter transmissivity, detector
/// efficiencies, and which filtered temporal mode is sent to the station.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SwapSetup {
    pub transmissivity: f64,
    pub eta1: f64,
    pub eta2: f64,
    pub mode_choice: FilterKind,
}

impl SwapSetup {
    pub fn new(transmissivity: f64, eta1: f64, eta2: f64, mode_choice: FilterKind) -> Result<Self> {
        if !(transmissivity > 0.0 && transmissivity < 1.0) {
            return Err(Error::InvalidParameter(
                "transmissivity must lie strictly inside (0, 1)".into(),
            ));
        }
        for (name, eta) in [("eta1", eta1), ("eta2", eta2)] {
            if !(eta > 0.0 && eta <= 1.0) {
                return Err(Error::InvalidParameter(format!(
                    "{name} must lie in (0, 1]"
                )));
            }
        }
        Ok(Self {
            transmissivity,
            eta1,
            eta2,
            mode_choice,
        })
    }

    /// Balanced station with ideal detectors.
    pub fn balanced(mode_choice: FilterKind) -> Self {
        Self {
            transmissivity: 0.5,
            eta1: 1.0,
            eta2: 1.0,
            mode_choice,
        }
    }

    pub fn with_efficiency(&self, eta: f64) -> Result<Self> {
        Self::new(self.transmissivity, eta, eta, self.mode_choice)
    }
}

/// Detector efficiency degraded by fiber loss,
/// eta = eta0 * 10^(-alpha0 d / 10).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossChannel {
    /// Intrinsic detector efficiency.
    pub detector_efficiency: f64,
    /// Fiber attenuation [dB/km].
    pub attenuation_db_per_km: f64,
    /// One-arm fiber length [km].
    pub fiber_length_km: f64,
}

impl LossChannel {
    pub fn new(
        detector_efficiency: f64,
        attenuation_db_per_km: f64,
        fiber_length_km: f64,
    ) -> Result<Self> {
        if !(detector_efficiency > 0.0 && detector_efficiency <= 1.0) {
            return Err(Error::InvalidParameter(
                "detector efficiency must lie in (0, 1]".into(),
            ));
        }
        if !(attenuation_db_per_km >= 0.0 && fiber_length_km >= 0.0) {
            return Err(Error::InvalidParameter(
                "attenuation and length must be non-negative".into(),
            ));
        }
        Ok(Self {
            detector_efficiency,
            attenuation_db_per_km,
            fiber_length_km,
        })
    }
}

/// Combined quantum efficiency of one detection arm.
pub fn detection_efficiency(chan: &LossChannel) -> f64 {
    chan.detector_efficiency
        * 10f64.powf(-chan.attenuation_db_per_km * chan.fiber_length_km / 10.0)
}

/// 8x8 joint covariance matrix of two systems in the order
/// (mech_A, mech_B, cav_A, cav_B).
#[derive(Debug, Clone, PartialEq)]
pub struct JointCm {
    cm: CovMatrix,
}

impl JointCm {
    /// Joint state of two independent systems: the cross blocks between
    /// the systems are zero by construction.
    pub fn from_independent(
        out_a: &OutputCm,
        out_b: &OutputCm,
        mode_choice: FilterKind,
    ) -> Result<Self> {
        let idx = match mode_choice {
            FilterKind::Tms => 1,
            FilterKind::Bs => 2,
        };
        let va = out_a.cm().select_modes(&[0, idx])?;
        let vb = out_b.cm().select_modes(&[0, idx])?;
        // Interleave to (mech_A, mech_B, cav_A, cav_B).
        let stacked = direct_sum(&va, &vb);
        let cm = stacked
            .select_modes(&[0, 2, 1, 3])?
            .with_labels(&["mech_A", "mech_B", "cav_A", "cav_B"])?;
        Ok(Self { cm })
    }

    /// Wrap an arbitrary physical 8x8 covariance matrix already ordered as
    /// (mech_A, mech_B, cav_A, cav_B).
    pub fn from_cm(cm: CovMatrix) -> Result<Self> {
        if cm.n_modes() != 4 {
            return Err(Error::InvalidParameter(
                "a joint covariance matrix has four modes".into(),
            ));
        }
        Ok(Self { cm })
    }

    pub fn cm(&self) -> &CovMatrix {
        &self.cm
    }

    /// Reduced 4x4 mechanical block E.
    pub fn mechanical_block(&self) -> Matrix4<f64> {
        self.cm.matrix().fixed_view::<4, 4>(0, 0).into()
    }

    /// Reduced 4x4 optical block O.
    pub fn optical_block(&self) -> Matrix4<f64> {
        self.cm.matrix().fixed_view::<4, 4>(4, 4).into()
    }

    /// Mechanical-optical cross block C (rows mechanical, columns optical).
    pub fn cross_block(&self) -> Matrix4<f64> {
        self.cm.matrix().fixed_view::<4, 4>(0, 4).into()
    }
}

struct BellAlgebra {
    r1: f64,
    r2: f64,
    r3: f64,
    det: f64,
}

/// Measured-quadrature covariance entries r1 = Var(x1'), r2 = Var(y2'),
/// r3 = Cov(x1', y2') including the detector-noise terms
/// (1 - eta) v_vac / eta.
fn bell_algebra(joint: &JointCm, setup: &SwapSetup) -> Result<BellAlgebra> {
    let o = joint.optical_block();
    let (a1, a3, a2) = (o[(0, 0)], o[(0, 1)], o[(1, 1)]);
    let (b1, b3, b2) = (o[(2, 2)], o[(2, 3)], o[(3, 3)]);
    let (z1, z3, z4, z2) = (o[(0, 2)], o[(0, 3)], o[(1, 2)], o[(1, 3)]);
    let t = setup.transmissivity;
    let st = (t * (1.0 - t)).sqrt();
    let noise1 = (1.0 - setup.eta1) * VACUUM_VARIANCE / setup.eta1;
    let noise2 = (1.0 - setup.eta2) * VACUUM_VARIANCE / setup.eta2;
    let r1 = (1.0 - t) * a1 + t * b1 - 2.0 * st * z1 + noise1;
    let r2 = t * a2 + (1.0 - t) * b2 + 2.0 * st * z2 + noise2;
    let r3 = st * (b3 - a3) - (1.0 - t) * z3 + t * z4;
    let det = r1 * r2 - r3 * r3;
    if det <= 0.0 {
        return Err(Error::SingularMeasurement { det });
    }
    Ok(BellAlgebra { r1, r2, r3, det })
}

/// Conditional covariance matrix of the two mechanical modes after the
/// dual-homodyne Bell detection, by the closed-form block expression
/// V_F = E - (1/det) sum_ij C_i K_ij C_j^T.
pub fn conditioned_cm(joint: &JointCm, setup: &SwapSetup) -> Result<CovMatrix> {
    let alg = bell_algebra(joint, setup)?;
    let (r1, r2, r3) = (alg.r1, alg.r2, alg.r3);
    let t = setup.transmissivity;
    let st = (t * (1.0 - t)).sqrt();

    let cross = joint.cross_block();
    // C_1: mechanical rows against cav_A; C_2: against cav_B.
    let c1: Matrix4x2<f64> = cross.fixed_view::<4, 2>(0, 0).into();
    let c2: Matrix4x2<f64> = cross.fixed_view::<4, 2>(0, 2).into();

    let k11 = Matrix2::new((1.0 - t) * r2, st * r3, st * r3, t * r1);
    let k22 = Matrix2::new(t * r2, -st * r3, -st * r3, (1.0 - t) * r1);
    let k12 = Matrix2::new(-st * r2, (1.0 - t) * r3, -t * r3, st * r1);
    let k21 = k12.transpose();

    let correction = (c1 * k11 * c1.transpose()
        + c1 * k12 * c2.transpose()
        + c2 * k21 * c1.transpose()
        + c2 * k22 * c2.transpose())
        / alg.det;
    let vf = joint.mechanical_block() - correction;
    CovMatrix::new(DMatrix::from_iterator(4, 4, vf.iter().copied()))?
        .with_labels(&["mech_A", "mech_B"])
}

/// Symplectic of a mode-pair mixer acting identically on both quadratures:
/// (c_i, c_j) -> (u c_i + v c_j, w c_i + q c_j), embedded over `n` modes.
fn embed_pair_mixer(n: usize, i: usize, j: usize, u: f64, v: f64, w: f64, q: f64) -> DMatrix<f64> {
    let mut s = DMatrix::identity(2 * n, 2 * n);
    for d in 0..2 {
        s[(2 * i + d, 2 * i + d)] = u;
        s[(2 * i + d, 2 * j + d)] = v;
        s[(2 * j + d, 2 * i + d)] = w;
        s[(2 * j + d, 2 * j + d)] = q;
    }
    s
}

/// Ideal homodyne of one quadrature (row `k` of the covariance matrix):
/// V -> V - V e_k e_k^T V / V_kk, the Moore-Penrose conditional for a
/// single measured quadrature.
fn homodyne_condition(v: &mut DMatrix<f64>, k: usize) -> Result<()> {
    let vkk = v[(k, k)];
    if vkk <= 0.0 {
        return Err(Error::SingularMeasurement { det: vkk });
    }
    let col = v.column(k).clone_owned();
    for i in 0..v.nrows() {
        for j in 0..v.ncols() {
            v[(i, j)] -= col[i] * col[j] / vkk;
        }
    }
    Ok(())
}

/// First-principles route to the conditional mechanical state: apply the
/// Bell-station beam splitter, mix each arm with a vacuum ancilla on an
/// eta beam splitter, homodyne X on arm 1 and Y on arm 2, and trace out
/// everything optical.
pub fn conditioned_cm_oracle(joint: &JointCm, setup: &SwapSetup) -> Result<CovMatrix> {
    // Modes: 0 mech_A, 1 mech_B, 2 cav_A, 3 cav_B, 4 ancilla_1, 5 ancilla_2.
    let big = direct_sum(joint.cm(), &CovMatrix::vacuum(2));
    let t = setup.transmissivity;
    let (ct, sr) = ((1.0 - t).sqrt(), t.sqrt());
    // Arm 1 = -sqrt(1-T) c_A + sqrt(T) c_B, arm 2 = sqrt(T) c_A + sqrt(1-T) c_B.
    let bell = embed_pair_mixer(6, 2, 3, -ct, sr, sr, ct);
    // Loss: arm_k -> sqrt(eta) arm_k + sqrt(1-eta) vacuum.
    let loss1 = embed_pair_mixer(
        6,
        2,
        4,
        setup.eta1.sqrt(),
        (1.0 - setup.eta1).sqrt(),
        -(1.0 - setup.eta1).sqrt(),
        setup.eta1.sqrt(),
    );
    let loss2 = embed_pair_mixer(
        6,
        3,
        5,
        setup.eta2.sqrt(),
        (1.0 - setup.eta2).sqrt(),
        -(1.0 - setup.eta2).sqrt(),
        setup.eta2.sqrt(),
    );
    let s = &loss2 * &loss1 * &bell;
    let mut v = s.clone() * big.matrix() * s.transpose();

    // X quadrature of mode 2 is row 4; Y quadrature of mode 3 is row 7.
    homodyne_condition(&mut v, 4)?;
    homodyne_condition(&mut v, 7)?;

    let reduced = CovMatrix::new(v)?;
    reduced
        .select_modes(&[0, 1])?
        .with_labels(&["mech_A", "mech_B"])
}

/// Swapped logarithmic negativity between the two mechanical modes after
/// the Bell detection of the chosen filtered modes.
pub fn swap_entanglement(out_a: &OutputCm, out_b: &OutputCm, setup: &SwapSetup) -> Result<f64> {
    let joint = JointCm::from_independent(out_a, out_b, setup.mode_choice)?;
    let vf = conditioned_cm(&joint, setup)?;
    crate::gaussian_tools::log_negativity_of_pair(&vf, 0, 1)
}
