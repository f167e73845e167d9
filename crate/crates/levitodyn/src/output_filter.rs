//! Temporal-mode filtering of the cavity output and the 6x6 steady
//! covariance matrix over (mechanics, TMS-filtered mode, BS-filtered mode).
//!
//! The covariance matrix is the frequency integral
//! V_out = (1/2pi) Int U(w) S(w) D S(w)^H U(w)^H dw with
//! S(w) = C M(w) + P, M(w) = (i w I + A)^(-1), and U(w) the quadrature
//! transform of the temporal kernels; the 1/2pi normalization is fixed by
//! the requirement that a decoupled cavity (g = 0, n_bar = 0) yields an
//! exact multimode vacuum. Fourier transforms follow
//! f~(w) = Int f(t) exp(+iwt) dt throughout.
//!
//! A filtered mode is a projection of the output field,
//! a_f = Int K(s) a_out(s) ds with an L2-normalized kernel K. The TMS
//! kernel sqrt(2 Gamma) exp(+Gamma t - i w0 t) for t <= 0 collects the
//! Stokes sideband of the field already emitted; it commutes with the
//! present mechanics and with any later packet. The BS (anti-Stokes)
//! sideband admits two constructions, and the module exposes both:
//!
//! - [`output_cm`]: the BS packet is also taken from the emitted field
//!   (kernel sqrt(2 Gamma) exp(+Gamma t + i w0 t), t <= 0), and the two
//!   past kernels are Loewdin-orthonormalized. All three modes are then
//!   mutually canonical, so the 6x6 matrix is a genuine three-mode state
//!   and the physicality bound (every symplectic eigenvalue >= 1/2) is
//!   enforced as a hard error at all parameters.
//!
//! - [`output_cm_two_sided`]: the BS packet is the field about to be
//!   emitted (kernel sqrt(2 Gamma) exp(-Gamma t + i w0 t), t >= 0), the
//!   exact time-sequenced arrangement behind the reference reproduction
//!   scenarios. The mechanics does not commute with a packet in its
//!   future, so rows mixing the mechanics with the BS mode describe
//!   emission correlations rather than one simultaneously accessible
//!   three-mode state; the physicality bound is enforced only on the
//!   (mechanics, TMS) and (TMS, BS) pairs, which are canonical.

use nalgebra::{DMatrix, Matrix2, SMatrix};
use num_complex::Complex64;

use crate::dynamics::LinearModel;
use crate::gaussian_tools::CovMatrix;
use crate::{Error, Result};

type CMatrix2 = SMatrix<Complex64, 2, 2>;
type CMatrix4 = SMatrix<Complex64, 4, 4>;
type CMatrix6x4 = SMatrix<Complex64, 6, 4>;
type Matrix6 = SMatrix<f64, 6, 6>;

/// Which sideband a temporal filter extracts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FilterKind {
    /// Two-mode-squeezing (Stokes) temporal mode, early time window.
    Tms,
    /// Beam-splitter (anti-Stokes) temporal mode, later time window.
    Bs,
}

/// One-sided exponential temporal filter of width Gamma rotating at the
/// mechanical sideband frequency `center`. Kernels are L2-normalized,
/// Int |F(t)|^2 dt = 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FilterSpec {
    pub kind: FilterKind,
    /// Filter width Gamma [rad/s].
    pub width: f64,
    /// Sideband rotation frequency [rad/s].
    pub center: f64,
}

impl FilterSpec {
    pub fn new(kind: FilterKind, width: f64, center: f64) -> Result<Self> {
        if !(width > 0.0 && width.is_finite()) {
            return Err(Error::InvalidParameter("filter width must be positive".into()));
        }
        if !center.is_finite() {
            return Err(Error::InvalidParameter("filter center must be finite".into()));
        }
        Ok(Self {
            kind,
            width,
            center,
        })
    }

    /// Time-domain kernel.
    /// Tms: sqrt(2 G) exp(+G t) exp(-i c t) for t <= 0, zero otherwise.
    /// Bs:  sqrt(2 G) exp(-G t) exp(+i c t) for t >= 0, zero otherwise.
    pub fn kernel(&self, t: f64) -> Complex64 {
        let amp = (2.0 * self.width).sqrt();
        match self.kind {
            FilterKind::Tms => {
                if t > 0.0 {
                    Complex64::ZERO
                } else {
                    amp * (self.width * t).exp() * Complex64::new(0.0, -self.center * t).exp()
                }
            }
            FilterKind::Bs => {
                if t < 0.0 {
                    Complex64::ZERO
                } else {
                    amp * (-self.width * t).exp() * Complex64::new(0.0, self.center * t).exp()
                }
            }
        }
    }

    /// Fourier transform of the kernel under f~(w) = Int f(t) e^{+iwt} dt:
    /// Tms: sqrt(2G) / (G + i(w - c)); Bs: sqrt(2G) / (G - i(w + c)).
    pub fn spectrum(&self, omega: f64) -> Complex64 {
        let amp = (2.0 * self.width).sqrt();
        match self.kind {
            FilterKind::Tms => amp / Complex64::new(self.width, omega - self.center),
            FilterKind::Bs => amp / Complex64::new(self.width, -(omega + self.center)),
        }
    }
}

/// Frequency response of one filtered-mode projection,
/// k^(w) = Int K(s) exp(-i w s) ds, for the kernels entering the output
/// integral. `mirror_bs` replaces the future BS kernel by its past mirror
/// sqrt(2G) exp(+G t + i c t) (t <= 0).
#[derive(Debug, Clone, Copy)]
struct ModeResponse {
    width: f64,
    center: f64,
    /// +1: Stokes rotation exp(-i c s); -1: anti-Stokes exp(+i c s).
    sideband: f64,
    /// +1: past support (t <= 0); -1: future support (t >= 0).
    past: f64,
}

impl ModeResponse {
    fn tms(spec: &FilterSpec) -> Self {
        Self {
            width: spec.width,
            center: spec.center,
            sideband: 1.0,
            past: 1.0,
        }
    }

    fn bs_future(spec: &FilterSpec) -> Self {
        Self {
            width: spec.width,
            center: spec.center,
            sideband: -1.0,
            past: -1.0,
        }
    }

    fn bs_past(spec: &FilterSpec) -> Self {
        Self {
            width: spec.width,
            center: spec.center,
            sideband: -1.0,
            past: 1.0,
        }
    }

    /// k^(w) = Int K(s) e^{-iws} ds. Past kernels give
    /// sqrt(2G)/(G - i(w + s c)), future kernels the conjugate pole.
    fn response(&self, omega: f64) -> Complex64 {
        let amp = (2.0 * self.width).sqrt();
        let detune = omega + self.sideband * self.center;
        amp / Complex64::new(self.width, -self.past * detune)
    }
}

/// 2x2 quadrature block [[R, -I], [I, R]] of one (possibly mixed) mode
/// response at frequency w, where R and I are the transforms of the
/// kernel's real and imaginary parts.
fn quadrature_block<F>(resp: F, omega: f64) -> CMatrix2
where
    F: Fn(f64) -> Complex64,
{
    let k_plus = resp(omega);
    let k_minus_conj = resp(-omega).conj();
    let r = 0.5 * (k_plus + k_minus_conj);
    let i = (k_plus - k_minus_conj) / Complex64::new(0.0, 2.0);
    CMatrix2::new(r, -i, i, r)
}

/// Steady covariance matrix of (mechanical, TMS-filtered, BS-filtered).
#[derive(Debug, Clone, PartialEq)]
pub struct OutputCm {
    cm: CovMatrix,
}

impl OutputCm {
    pub fn cm(&self) -> &CovMatrix {
        &self.cm
    }

    pub fn into_cm(self) -> CovMatrix {
        self.cm
    }

    pub fn mechanical_block(&self) -> Matrix2<f64> {
        self.cm.matrix().fixed_view::<2, 2>(0, 0).into()
    }

    /// 4x4 covariance of (mechanics, chosen filtered mode).
    pub fn pair_with_mechanics(&self, kind: FilterKind) -> Result<CovMatrix> {
        let idx = match kind {
            FilterKind::Tms => 1,
            FilterKind::Bs => 2,
        };
        self.cm.select_modes(&[0, idx])
    }

    pub fn en_tms_mechanics(&self) -> Result<f64> {
        crate::gaussian_tools::log_negativity_of_pair(&self.cm, 0, 1)
    }

    pub fn en_bs_mechanics(&self) -> Result<f64> {
        crate::gaussian_tools::log_negativity_of_pair(&self.cm, 0, 2)
    }

    pub fn en_tms_bs(&self) -> Result<f64> {
        crate::gaussian_tools::log_negativity_of_pair(&self.cm, 1, 2)
    }
}

fn input_output_matrices(kappa: f64) -> (SMatrix<f64, 6, 4>, SMatrix<f64, 6, 4>) {
    let sk = kappa.sqrt();
    let mut c = SMatrix::<f64, 6, 4>::zeros();
    c[(0, 0)] = 1.0;
    c[(1, 1)] = 1.0;
    c[(2, 2)] = sk;
    c[(3, 3)] = sk;
    c[(4, 2)] = sk;
    c[(5, 3)] = sk;
    let mut p = SMatrix::<f64, 6, 4>::zeros();
    p[(2, 2)] = 1.0 / sk;
    p[(3, 3)] = 1.0 / sk;
    p[(4, 2)] = 1.0 / sk;
    p[(5, 3)] = 1.0 / sk;
    (c, p)
}

/// S(w) = C M(w) + P with M(w) = (i w I + A)^(-1). Rows 1-2 pass the
/// mechanical quadratures, rows 3-4 and 5-6 carry two copies of the
/// output-field quadratures from a_out = sqrt(kappa) a - a_in.
pub fn transfer_matrix(omega: f64, model: &LinearModel) -> Result<CMatrix6x4> {
    let mut m = CMatrix4::zeros();
    for i in 0..4 {
        for j in 0..4 {
            m[(i, j)] = Complex64::new(model.drift()[(i, j)], 0.0);
        }
        m[(i, i)] += Complex64::new(0.0, omega);
    }
    let m_inv = m
        .try_inverse()
        .ok_or_else(|| Error::Conditioning("singular i w I + A".into()))?;
    let (c, p) = input_output_matrices(model.kappa);
    let mut s = CMatrix6x4::zeros();
    for i in 0..6 {
        for j in 0..4 {
            let mut acc = Complex64::new(p[(i, j)], 0.0);
            for k in 0..4 {
                acc += Complex64::new(c[(i, k)], 0.0) * m_inv[(k, j)];
            }
            s[(i, j)] = acc;
        }
    }
    Ok(s)
}

/// Loewdin mixing of two mode responses with commutator overlap
/// m = [a_1, a_2^dag]: the closest exactly orthonormal pair.
struct OrthoPair {
    a: ModeResponse,
    b: ModeResponse,
    alpha: f64,
    beta: f64,
    /// Phase of the overlap, m = |m| e^{i psi}.
    psi: f64,
}

impl OrthoPair {
    fn new(a: ModeResponse, b: ModeResponse) -> Result<Self> {
        // Both kernels past-supported: overlap of exp((G1 - i s1 c1) s)
        // and the conjugate of exp((G2 - i s2 c2) s) over s <= 0.
        let denom = Complex64::new(
            a.width + b.width,
            -(a.sideband * a.center - b.sideband * b.center),
        );
        let m = 2.0 * (a.width * b.width).sqrt() / denom;
        let norm = m.norm();
        if norm >= 1.0 - 1e-9 {
            return Err(Error::Conditioning(
                "filter kernels are degenerate; cannot orthonormalize".into(),
            ));
        }
        let psi = m.arg();
        let lp = (1.0 + norm).powf(-0.5);
        let lm = (1.0 - norm).powf(-0.5);
        Ok(Self {
            a,
            b,
            alpha: 0.5 * (lp + lm),
            beta: 0.5 * (lp - lm),
            psi,
        })
    }

    fn response_a(&self, omega: f64) -> Complex64 {
        self.alpha * self.a.response(omega)
            + self.beta * Complex64::from_polar(1.0, self.psi) * self.b.response(omega)
    }

    fn response_b(&self, omega: f64) -> Complex64 {
        self.beta * Complex64::from_polar(1.0, -self.psi) * self.a.response(omega)
            + self.alpha * self.b.response(omega)
    }
}

/// Real part of the Hermitian spectral density U(w) S(w) D S(w)^H U(w)^H
/// for two filtered-mode responses.
fn spectral_integrand<FT, FB>(
    omega: f64,
    model: &LinearModel,
    resp_tms: &FT,
    resp_bs: &FB,
) -> Result<Matrix6>
where
    FT: Fn(f64) -> Complex64,
    FB: Fn(f64) -> Complex64,
{
    let s = transfer_matrix(omega, model)?;
    let mut w = s;
    let bt = quadrature_block(resp_tms, omega);
    let bb = quadrature_block(resp_bs, omega);
    for j in 0..4 {
        let (r2, r3) = (s[(2, j)], s[(3, j)]);
        w[(2, j)] = bt[(0, 0)] * r2 + bt[(0, 1)] * r3;
        w[(3, j)] = bt[(1, 0)] * r2 + bt[(1, 1)] * r3;
        let (r4, r5) = (s[(4, j)], s[(5, j)]);
        w[(4, j)] = bb[(0, 0)] * r4 + bb[(0, 1)] * r5;
        w[(5, j)] = bb[(1, 0)] * r4 + bb[(1, 1)] * r5;
    }
    let d = model.diffusion();
    let mut g = Matrix6::zeros();
    for i in 0..6 {
        for j in i..6 {
            let mut acc = Complex64::ZERO;
            for k in 0..4 {
                acc += w[(i, k)] * d[(k, k)] * w[(j, k)].conj();
            }
            g[(i, j)] = acc.re;
            g[(j, i)] = acc.re;
        }
    }
    Ok(g)
}

/// Frequencies where the spectral density is sharply peaked, with their
/// half widths: drift eigenvalues and the filter sidebands.
fn spectral_features(model: &LinearModel, specs: &[&FilterSpec]) -> Vec<(f64, f64)> {
    let mut feats = Vec::new();
    for z in model.drift().complex_eigenvalues().iter() {
        let center = z.im.abs();
        let width = z.re.abs().max(1e-12 * model.omega_m);
        feats.push((center, width));
    }
    for spec in specs {
        feats.push((spec.center.abs(), spec.width));
    }
    feats
}

/// Quadrature breakpoints on [0, cut]: a geometric ladder of panel edges
/// around every spectral feature, so that arbitrarily narrow resonances
/// are resolved before adaptive refinement takes over.
fn seed_breakpoints(features: &[(f64, f64)], cut: f64) -> Vec<f64> {
    let mut pts = vec![0.0, cut];
    for &(center, width) in features {
        if center > cut {
            continue;
        }
        pts.push(center);
        let mut h = width;
        while h < 4.0 * cut {
            for edge in [center - h, center + h] {
                if edge > 0.0 && edge < cut {
                    pts.push(edge);
                }
            }
            h *= 4.0;
        }
    }
    pts.sort_by(f64::total_cmp);
    pts.dedup_by(|a, b| (*a - *b).abs() <= 1e-15 * cut);
    pts
}

fn integrate_output<FT, FB>(
    model: &LinearModel,
    tms: &FilterSpec,
    bs: &FilterSpec,
    resp_tms: FT,
    resp_bs: FB,
    tol: f64,
) -> Result<(CovMatrix, CovMatrix)>
where
    FT: Fn(f64) -> Complex64,
    FB: Fn(f64) -> Complex64,
{
    if !(tol > 0.0 && tol < 1.0) {
        return Err(Error::InvalidParameter("tolerance must lie in (0, 1)".into()));
    }
    if !model.is_stable() {
        return Err(Error::UnstableModel);
    }
    let v_ss = model.steady_state_cm()?;

    // Scale quadratures to correlation-like units so the relative
    // quadrature tolerance is meaningful for every block even when the
    // thermal mechanical variance is enormous.
    let mut scale = [1.0f64; 6];
    scale[0] = v_ss.matrix()[(0, 0)].sqrt();
    scale[1] = v_ss.matrix()[(1, 1)].sqrt();
    for (k, s) in scale.iter_mut().enumerate().skip(2) {
        let diag = v_ss.matrix()[(2 + (k % 2), 2 + (k % 2))];
        *s = diag.max(0.5).sqrt();
    }

    let gamma_max = tms.width.max(bs.width);
    let cut = 10.0 * model.kappa.max(model.delta.abs() + model.omega_m) + 40.0 * gamma_max;
    let features = spectral_features(model, &[tms, bs]);
    let breakpoints = seed_breakpoints(&features, cut);

    let integrand = |omega: f64| -> Matrix6 {
        let g = spectral_integrand(omega, model, &resp_tms, &resp_bs)
            .unwrap_or_else(|_| Matrix6::from_element(f64::NAN));
        let mut h = g;
        for i in 0..6 {
            for j in 0..6 {
                h[(i, j)] /= scale[i] * scale[j];
            }
        }
        h
    };

    let core: Matrix6 =
        crate::numeric::integrate_adaptive(&integrand, &breakpoints, tol, 0.0, 20_000)?;
    let tail: Matrix6 = crate::numeric::integrate_upper_tail(&integrand, cut, tol, tol)?;

    let mut v = DMatrix::zeros(6, 6);
    for i in 0..6 {
        for j in 0..6 {
            let val = (core[(i, j)] + tail[(i, j)]) / std::f64::consts::PI;
            v[(i, j)] = val * scale[i] * scale[j];
        }
    }
    let v = (&v + v.transpose()) * 0.5;
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::Conditioning(
            "non-finite entry in output covariance integral".into(),
        ));
    }

    let cm = CovMatrix::new(v)?.with_labels(&["mechanical", "tms", "bs"])?;

    // Delta-row consistency: the mechanical block of the output integral
    // must reproduce the intracavity mechanical block.
    let mech_scale = v_ss.matrix()[(0, 0)].abs().max(v_ss.matrix()[(1, 1)].abs());
    let mut mech_err = 0.0f64;
    for i in 0..2 {
        for j in 0..2 {
            mech_err = mech_err.max((cm.matrix()[(i, j)] - v_ss.matrix()[(i, j)]).abs());
        }
    }
    if mech_err > mech_scale * (100.0 * tol).max(1e-5) {
        return Err(Error::Conditioning(format!(
            "output mechanical block deviates from the intracavity block by {:.3e} (relative)",
            mech_err / mech_scale
        )));
    }
    Ok((cm, v_ss))
}

/// Output covariance matrix over mutually canonical modes: mechanics plus
/// the Loewdin-orthonormalized pair of past-field sideband packets. The
/// result is a genuine three-mode state; any symplectic eigenvalue below
/// 1/2 - 1e-6 is a hard error.
pub fn output_cm(model: &LinearModel, filter_width: f64, tol: f64) -> Result<OutputCm> {
    let tms = FilterSpec::new(FilterKind::Tms, filter_width, model.omega_m)?;
    let bs = FilterSpec::new(FilterKind::Bs, filter_width, model.omega_m)?;
    output_cm_with_filters(model, &tms, &bs, tol)
}

/// Canonical-mode output covariance for explicit filter choices.
pub fn output_cm_with_filters(
    model: &LinearModel,
    tms: &FilterSpec,
    bs: &FilterSpec,
    tol: f64,
) -> Result<OutputCm> {
    if tms.kind != FilterKind::Tms || bs.kind != FilterKind::Bs {
        return Err(Error::InvalidParameter(
            "filters must be passed as (tms, bs)".into(),
        ));
    }
    let pair = OrthoPair::new(ModeResponse::tms(tms), ModeResponse::bs_past(bs))?;
    let (cm, _) = integrate_output(
        model,
        tms,
        bs,
        |w| pair.response_a(w),
        |w| pair.response_b(w),
        tol,
    )?;
    let nu_min = cm.min_symplectic_eigenvalue()?;
    if nu_min < 0.5 - 1e-6 {
        return Err(Error::Unphysical { nu_min });
    }
    Ok(OutputCm { cm })
}

/// Output covariance matrix in the time-sequenced arrangement: the TMS
/// packet collects the already emitted field and the BS packet the field
/// about to be emitted. Pairs (mechanics, TMS) and (TMS, BS) are canonical
/// and checked for physicality; the (mechanics, BS) correlations describe
/// the state swapped onto the outgoing packet.
pub fn output_cm_two_sided(model: &LinearModel, filter_width: f64, tol: f64) -> Result<OutputCm> {
    let tms = FilterSpec::new(FilterKind::Tms, filter_width, model.omega_m)?;
    let bs = FilterSpec::new(FilterKind::Bs, filter_width, model.omega_m)?;
    output_cm_two_sided_with_filters(model, &tms, &bs, tol)
}

/// Time-sequenced output covariance for explicit filter choices.
pub fn output_cm_two_sided_with_filters(
    model: &LinearModel,
    tms: &FilterSpec,
    bs: &FilterSpec,
    tol: f64,
) -> Result<OutputCm> {
    if tms.kind != FilterKind::Tms || bs.kind != FilterKind::Bs {
        return Err(Error::InvalidParameter(
            "filters must be passed as (tms, bs)".into(),
        ));
    }
    let rt = ModeResponse::tms(tms);
    let rb = ModeResponse::bs_future(bs);
    let (cm, _) = integrate_output(
        model,
        tms,
        bs,
        move |w| rt.response(w),
        move |w| rb.response(w),
        tol,
    )?;
    for modes in [[0usize, 1], [1, 2]] {
        let sub = cm.select_modes(&modes)?;
        let nu_min = sub.min_symplectic_eigenvalue()?;
        if nu_min < 0.5 - 1e-6 {
            return Err(Error::Unphysical { nu_min });
        }
    }
    Ok(OutputCm { cm })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::build_model;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    #[test]
    fn kernels_are_l2_normalized() {
        for kind in [FilterKind::Tms, FilterKind::Bs] {
            let spec = FilterSpec::new(kind, 0.3, 2.0).unwrap();
            let f = |t: f64| spec.kernel(t).norm_sqr();
            let norm: f64 =
                crate::numeric::integrate_adaptive(&f, &[-200.0, 0.0, 200.0], 1e-12, 0.0, 4000)
                    .unwrap();
            assert_relative_eq!(norm, 1.0, max_relative = 1e-10);
        }
    }

    #[test]
    fn spectrum_satisfies_parseval() {
        // Int |f~|^2 dw / 2pi = 1 for the unit-norm kernels.
        for kind in [FilterKind::Tms, FilterKind::Bs] {
            let spec = FilterSpec::new(kind, 0.7, 5.0).unwrap();
            let f = |w: f64| spec.spectrum(w).norm_sqr();
            let core: f64 = crate::numeric::integrate_adaptive(
                &f,
                &[-300.0, -5.0, 0.0, 5.0, 300.0],
                1e-10,
                0.0,
                4000,
            )
            .unwrap();
            let up: f64 = crate::numeric::integrate_upper_tail(&f, 300.0, 1e-10, 1e-12).unwrap();
            let down: f64 =
                crate::numeric::integrate_upper_tail(&|w| f(-w), 300.0, 1e-10, 1e-12).unwrap();
            let total = (core + up + down) / std::f64::consts::TAU;
            assert_abs_diff_eq!(total, 1.0, epsilon = 1e-8);
        }
    }

    #[test]
    fn spectrum_peak_and_half_width() {
        let gamma = 0.4;
        let center = 3.0;
        let tms = FilterSpec::new(FilterKind::Tms, gamma, center).unwrap();
        let bs = FilterSpec::new(FilterKind::Bs, gamma, center).unwrap();
        // Lorentzians: the TMS transform peaks at +center, the BS
        // transform at -center; half maximum one width off the peak.
        let peak_t = tms.spectrum(center).norm_sqr();
        let peak_b = bs.spectrum(-center).norm_sqr();
        assert_relative_eq!(peak_t, 2.0 / gamma, max_relative = 1e-12);
        assert_relative_eq!(peak_b, 2.0 / gamma, max_relative = 1e-12);
        assert_relative_eq!(
            tms.spectrum(center + gamma).norm_sqr(),
            peak_t / 2.0,
            max_relative = 1e-12
        );
        assert_relative_eq!(
            bs.spectrum(-center + gamma).norm_sqr(),
            peak_b / 2.0,
            max_relative = 1e-12
        );
    }

    #[test]
    fn spectrum_matches_discrete_fourier_oracle() {
        // Dense numerical transform of the time kernel against the closed
        // form, on t in [-40/Gamma, 40/Gamma].
        let gamma = 0.5;
        for kind in [FilterKind::Tms, FilterKind::Bs] {
            let spec = FilterSpec::new(kind, gamma, 2.5).unwrap();
            let span = 40.0 / gamma;
            for omega in [-6.0, -2.5, -0.9, 0.0, 0.4, 2.5, 7.0] {
                let f = |t: f64| {
                    let z = spec.kernel(t) * Complex64::new(0.0, omega * t).exp();
                    SMatrix::<f64, 2, 1>::new(z.re, z.im)
                };
                let v: SMatrix<f64, 2, 1> = crate::numeric::integrate_adaptive(
                    &f,
                    &[-span, -span / 8.0, 0.0, span / 8.0, span],
                    1e-10,
                    1e-12,
                    8000,
                )
                .unwrap();
                let numeric = Complex64::new(v[0], v[1]);
                let closed = spec.spectrum(omega);
                assert!(
                    (numeric - closed).norm() <= 1e-6,
                    "{kind:?} at w={omega}: numeric {numeric} vs closed {closed}"
                );
            }
        }
    }

    #[test]
    fn orthonormalized_responses_satisfy_gram_identity() {
        // Int k_i(w) k_j(w)^* dw / 2pi = [a_i, a_j^dag] = delta_ij after
        // the Loewdin mix.
        let tms = FilterSpec::new(FilterKind::Tms, 0.3, 1.0).unwrap();
        let bs = FilterSpec::new(FilterKind::Bs, 0.3, 1.0).unwrap();
        let pair = OrthoPair::new(ModeResponse::tms(&tms), ModeResponse::bs_past(&bs)).unwrap();
        type Resp<'a> = &'a dyn Fn(f64) -> Complex64;
        let entries: [(Resp, Resp, f64); 3] = [
            (&|w| pair.response_a(w), &|w| pair.response_a(w), 1.0),
            (&|w| pair.response_b(w), &|w| pair.response_b(w), 1.0),
            (&|w| pair.response_a(w), &|w| pair.response_b(w), 0.0),
        ];
        for (ka, kb, expect) in entries {
            let f = |w: f64| {
                let z = ka(w) * kb(w).conj();
                SMatrix::<f64, 2, 1>::new(z.re, z.im)
            };
            let core: SMatrix<f64, 2, 1> = crate::numeric::integrate_adaptive(
                &f,
                &[-120.0, -1.0, 0.0, 1.0, 120.0],
                1e-10,
                1e-13,
                8000,
            )
            .unwrap();
            let up: SMatrix<f64, 2, 1> =
                crate::numeric::integrate_upper_tail(&f, 120.0, 1e-10, 1e-13).unwrap();
            let down: SMatrix<f64, 2, 1> =
                crate::numeric::integrate_upper_tail(&|w| f(-w), 120.0, 1e-10, 1e-13).unwrap();
            let total = (core + up + down) / std::f64::consts::TAU;
            assert_abs_diff_eq!(total[0], expect, epsilon = 1e-7);
            assert_abs_diff_eq!(total[1], 0.0, epsilon = 1e-7);
        }
    }

    #[test]
    fn transfer_matrix_reality_identity() {
        let m = build_model(1.0, 0.1, 0.3, 1.0, 4.0, 2.0).unwrap();
        for omega in [0.13, 0.9, 3.7] {
            let s_plus = transfer_matrix(omega, &m).unwrap();
            let s_minus = transfer_matrix(-omega, &m).unwrap();
            for i in 0..6 {
                for j in 0..4 {
                    let diff = (s_minus[(i, j)] - s_plus[(i, j)].conj()).norm();
                    assert!(diff < 1e-12, "S(-w) must equal conj(S(w))");
                }
            }
        }
    }

    #[test]
    fn decoupled_output_spectrum_is_vacuum() {
        // With g = 0 the output field reflects pure vacuum at every
        // frequency: the optical block of S D S^H is vacuum, with rows 3-4
        // and 5-6 two copies of the same field.
        let m = build_model(1.0, 0.1, 0.0, 0.7, 2.5, 3.0).unwrap();
        let d = m.diffusion();
        for omega in [0.0, 0.41, 1.0, 2.9, 11.0] {
            let s = transfer_matrix(omega, &m).unwrap();
            for i in 2..6 {
                for j in 2..6 {
                    let mut acc = Complex64::ZERO;
                    for k in 0..4 {
                        acc += s[(i, k)] * d[(k, k)] * s[(j, k)].conj();
                    }
                    let expect = if i % 2 == j % 2 { 0.5 } else { 0.0 };
                    assert!(
                        (acc - Complex64::new(expect, 0.0)).norm() < 1e-12,
                        "optical output block at w={omega}: ({i},{j}) = {acc}"
                    );
                }
            }
            // Block structure: mechanical rows carry no optical noise.
            assert!(s[(0, 2)].norm() < 1e-14 && s[(0, 3)].norm() < 1e-14);
            assert!(s[(1, 2)].norm() < 1e-14 && s[(1, 3)].norm() < 1e-14);
        }
    }

    #[test]
    fn small_kappa_output_is_noise_reflection() {
        // kappa -> 0 removes the intracavity contribution; rows 3-6 reduce
        // to the reflected input noise.
        let m = build_model(1.0, 0.1, 0.2, 1.0, 1e-9, 0.0).unwrap();
        let d = m.diffusion();
        let s = transfer_matrix(0.3, &m).unwrap();
        for i in 2..6 {
            for j in 2..6 {
                let mut acc = Complex64::ZERO;
                for k in 0..4 {
                    acc += s[(i, k)] * d[(k, k)] * s[(j, k)].conj();
                }
                let expect = if i % 2 == j % 2 { 0.5 } else { 0.0 };
                assert!((acc - Complex64::new(expect, 0.0)).norm() < 1e-4);
            }
        }
    }

    #[test]
    fn decoupled_output_cm_is_vacuum_both_constructions() {
        let m = build_model(1.0, 0.05, 0.0, 1.0, 3.0, 0.0).unwrap();
        for out in [
            output_cm(&m, 0.2, 1e-9).unwrap(),
            output_cm_two_sided(&m, 0.2, 1e-9).unwrap(),
        ] {
            for i in 0..6 {
                for j in 0..6 {
                    let expect = if i == j { 0.5 } else { 0.0 };
                    assert_abs_diff_eq!(out.cm().matrix()[(i, j)], expect, epsilon = 1e-8);
                }
            }
            assert!(out.en_tms_mechanics().unwrap() < 1e-10);
            assert!(out.en_bs_mechanics().unwrap() < 1e-10);
            assert!(out.en_tms_bs().unwrap() < 1e-10);
        }
    }

    #[test]
    fn mechanical_block_matches_intracavity() {
        let m = build_model(1.0, 1e-4, 0.4, 1.0, 3.0, 20.0).unwrap();
        let v_ss = m.steady_state_cm().unwrap();
        let scale = v_ss.matrix()[(0, 0)];
        for out in [
            output_cm(&m, 0.19, 1e-7).unwrap(),
            output_cm_two_sided(&m, 0.19, 1e-7).unwrap(),
        ] {
            for i in 0..2 {
                for j in 0..2 {
                    let diff = (out.cm().matrix()[(i, j)] - v_ss.matrix()[(i, j)]).abs();
                    assert!(diff <= 1e-5 * scale, "mech block mismatch {diff}");
                }
            }
        }
    }

    #[test]
    fn canonical_output_cm_is_physical_and_converged() {
        let m = build_model(1.0, 1e-5, 0.4, 1.0, 3.0, 100.0).unwrap();
        let coarse = output_cm(&m, 0.19, 1e-6).unwrap();
        let fine = output_cm(&m, 0.19, 1e-9).unwrap();
        assert!(coarse.cm().is_physical(1e-6));
        for i in 0..6 {
            for j in 0..6 {
                let a = coarse.cm().matrix()[(i, j)];
                let b = fine.cm().matrix()[(i, j)];
                let scale =
                    (coarse.cm().matrix()[(i, i)] * coarse.cm().matrix()[(j, j)]).sqrt();
                assert!(
                    (a - b).abs() <= 1e-6 * scale,
                    "entry ({i},{j}) moved from {a} to {b}"
                );
            }
        }
    }

    #[test]
    fn two_sided_pairs_are_physical() {
        let m = build_model(1.0, 1e-5, 0.4, 1.0, 3.0, 100.0).unwrap();
        let out = output_cm_two_sided(&m, 0.19, 1e-6).unwrap();
        for modes in [[0usize, 1], [1, 2]] {
            let nu = out
                .cm()
                .select_modes(&modes)
                .unwrap()
                .min_symplectic_eigenvalue()
                .unwrap();
            assert!(nu >= 0.5 - 1e-6, "pair {modes:?} unphysical: {nu}");
        }
    }

    #[test]
    fn weak_coupling_structure() {
        // In the rotating-wave regime only the TMS mode entangles with the
        // mechanics, in both constructions. Damping and occupation are the
        // room-temperature operating point scaled to omega = 1.
        let omega = 1.0;
        let m = build_model(omega, 7.7e-10, 0.04 * omega, omega, 3.0 * omega, 4.9e7).unwrap();
        for two_sided in [false, true] {
            let mut saw_positive = false;
            for gf in [0.02, 0.05, 0.1] {
                let out = if two_sided {
                    output_cm_two_sided(&m, gf * omega, 1e-6).unwrap()
                } else {
                    output_cm(&m, gf * omega, 1e-6).unwrap()
                };
                let tms = out.en_tms_mechanics().unwrap();
                let bs = out.en_bs_mechanics().unwrap();
                if tms > 1e-3 {
                    saw_positive = true;
                }
                assert!(bs <= 1e-3, "BS-mechanics should stay separable, got {bs}");
            }
            assert!(saw_positive, "TMS-mechanics entanglement expected (two_sided={two_sided})");
        }
    }

    #[test]
    fn two_sided_ultrastrong_entangles_all_pairs() {
        let omega = 1.0;
        let m = build_model(omega, 1e-6, 0.4 * omega, omega, 3.0 * omega, 10.0).unwrap();
        let out = output_cm_two_sided(&m, 0.19 * omega, 1e-6).unwrap();
        assert!(out.en_tms_mechanics().unwrap() > 0.0);
        assert!(out.en_bs_mechanics().unwrap() > 0.0);
        assert!(out.en_tms_bs().unwrap() > 0.0);
    }

    #[test]
    fn wide_filter_washes_out_entanglement() {
        let omega = 1.0;
        let m = build_model(omega, 1e-6, 0.4 * omega, omega, 3.0 * omega, 10.0).unwrap();
        let opt = output_cm(&m, 0.19 * omega, 1e-6).unwrap();
        let wide = output_cm(&m, 20.0 * omega, 1e-6).unwrap();
        assert!(opt.en_tms_mechanics().unwrap() > 0.0);
        assert!(wide.en_tms_mechanics().unwrap() < opt.en_tms_mechanics().unwrap());
        assert!(wide.en_tms_bs().unwrap() < 1e-2);
    }

    #[test]
    fn unstable_model_is_rejected() {
        let m = build_model(1.0, 1e-3, 0.6, -1.0, 0.05, 0.0).unwrap();
        assert!(matches!(
            output_cm(&m, 0.2, 1e-6),
            Err(Error::UnstableModel)
        ));
    }
}
