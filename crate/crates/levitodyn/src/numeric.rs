//! Small numerical building blocks: adaptive Gauss-Kronrod quadrature over
//! scalar- or matrix-valued integrands, a semi-infinite tail transform,
//! bisection, and a log-log slope fit.

use nalgebra::SMatrix;

use crate::{Error, Result};

// 15-point Kronrod extension of 7-point Gauss, abscissae on [0, 1] side.
const XGK: [f64; 8] = [
    0.991_455_371_120_813,
    0.949_107_912_342_759,
    0.864_864_423_359_769,
    0.741_531_185_599_394,
    0.586_087_235_467_691,
    0.405_845_151_377_397,
    0.207_784_955_007_898,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529,
    0.063_092_092_629_979,
    0.104_790_010_322_250,
    0.140_653_259_715_525,
    0.169_004_726_639_267,
    0.190_350_578_064_785,
    0.204_432_940_075_298,
    0.209_482_141_084_728,
];
// Weights of the embedded 7-point Gauss rule (nodes XGK[1], XGK[3], XGK[5], XGK[7]).
const WG: [f64; 4] = [
    0.129_484_966_168_870,
    0.279_705_391_489_277,
    0.381_830_050_505_119,
    0.417_959_183_673_469,
];

/// Values an adaptive quadrature can accumulate.
pub trait QuadValue: Clone {
    fn zero_value() -> Self;
    fn add_scaled(&mut self, other: &Self, weight: f64);
    fn abs_max(&self) -> f64;
}

impl QuadValue for f64 {
    fn zero_value() -> Self {
        0.0
    }
    fn add_scaled(&mut self, other: &Self, weight: f64) {
        *self += other * weight;
    }
    fn abs_max(&self) -> f64 {
        self.abs()
    }
}

impl<const R: usize, const C: usize> QuadValue for SMatrix<f64, R, C> {
    fn zero_value() -> Self {
        SMatrix::zeros()
    }
    fn add_scaled(&mut self, other: &Self, weight: f64) {
        *self += other * weight;
    }
    fn abs_max(&self) -> f64 {
        self.iter().fold(0.0, |m, x| m.max(x.abs()))
    }
}

/// One Gauss-Kronrod 15-point panel. Returns (integral, error estimate).
fn gk15_panel<T, F>(f: &F, a: f64, b: f64) -> (T, f64)
where
    T: QuadValue,
    F: Fn(f64) -> T,
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut kronrod = T::zero_value();
    let mut gauss = T::zero_value();

    let fc = f(center);
    kronrod.add_scaled(&fc, WGK[7] * half);
    gauss.add_scaled(&fc, WG[3] * half);

    for j in 0..7 {
        let x = XGK[j] * half;
        let f1 = f(center - x);
        let f2 = f(center + x);
        kronrod.add_scaled(&f1, WGK[j] * half);
        kronrod.add_scaled(&f2, WGK[j] * half);
        if j % 2 == 1 {
            let wg = WG[j / 2];
            gauss.add_scaled(&f1, wg * half);
            gauss.add_scaled(&f2, wg * half);
        }
    }

    let mut diff = kronrod.clone();
    diff.add_scaled(&gauss, -1.0);
    let err = diff.abs_max();
    (kronrod, err)
}

struct Panel<T> {
    a: f64,
    b: f64,
    value: T,
    err: f64,
}

/// Adaptive quadrature over a fixed set of initial panels delimited by
/// `breakpoints`. Panels with the largest error estimate are bisected until
/// the summed error falls below `max(tol_abs, tol_rel * |integral|)`.
pub fn integrate_adaptive<T, F>(
    f: &F,
    breakpoints: &[f64],
    tol_rel: f64,
    tol_abs: f64,
    max_panels: usize,
) -> Result<T>
where
    T: QuadValue,
    F: Fn(f64) -> T,
{
    if breakpoints.len() < 2 {
        return Err(Error::InvalidParameter(
            "quadrature needs at least one interval".into(),
        ));
    }
    let mut panels: Vec<Panel<T>> = Vec::with_capacity(max_panels.min(4096));
    for w in breakpoints.windows(2) {
        if w[1] <= w[0] {
            continue;
        }
        let (value, err) = gk15_panel(f, w[0], w[1]);
        panels.push(Panel {
            a: w[0],
            b: w[1],
            value,
            err,
        });
    }
    if panels.is_empty() {
        return Err(Error::InvalidParameter(
            "quadrature breakpoints define no interval".into(),
        ));
    }

    loop {
        let mut total = T::zero_value();
        for p in &panels {
            total.add_scaled(&p.value, 1.0);
        }
        let err_sum: f64 = panels.iter().map(|p| p.err).sum();
        let target = tol_abs.max(tol_rel * total.abs_max());
        if err_sum <= target {
            return Ok(total);
        }
        if panels.len() >= max_panels {
            return Err(Error::QuadratureNonConvergence {
                requested: target,
                achieved: err_sum,
            });
        }

        let worst = panels
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.err.total_cmp(&y.1.err))
            .map(|(i, _)| i)
            .expect("non-empty panel list");
        let Panel { a, b, .. } = panels[worst];
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            // Interval at floating-point resolution; accept its estimate.
            let achieved: f64 = panels.iter().map(|p| p.err).sum();
            return Err(Error::QuadratureNonConvergence {
                requested: target,
                achieved,
            });
        }
        let (v1, e1) = gk15_panel(f, a, mid);
        let (v2, e2) = gk15_panel(f, mid, b);
        panels[worst] = Panel {
            a,
            b: mid,
            value: v1,
            err: e1,
        };
        panels.push(Panel {
            a: mid,
            b,
            value: v2,
            err: e2,
        });
    }
}

/// Convenience wrapper: adaptive quadrature of `f` over `[a, b]`.
pub fn integrate<T, F>(f: &F, a: f64, b: f64, tol_rel: f64, tol_abs: f64) -> Result<T>
where
    T: QuadValue,
    F: Fn(f64) -> T,
{
    integrate_adaptive(f, &[a, b], tol_rel, tol_abs, 2000)
}

/// Integral of `f` over the semi-infinite tail `[cut, inf)` via the
/// substitution w = cut / u, u in (0, 1]. The transformed integrand must be
/// bounded (i.e. f must decay at least as 1/w^2).
pub fn integrate_upper_tail<T, F>(f: &F, cut: f64, tol_rel: f64, tol_abs: f64) -> Result<T>
where
    T: QuadValue,
    F: Fn(f64) -> T,
{
    if cut <= 0.0 {
        return Err(Error::InvalidParameter(
            "tail transform requires a positive cut frequency".into(),
        ));
    }
    let g = |u: f64| {
        let mut out = T::zero_value();
        out.add_scaled(&f(cut / u), cut / (u * u));
        out
    };
    integrate_adaptive(&g, &[0.0, 0.25, 1.0], tol_rel, tol_abs, 800)
}

/// Bisection root solve of `f` on `[lo, hi]`, to relative tolerance
/// `rel_tol` on the abscissa. `f(lo)` and `f(hi)` must differ in sign.
pub fn bisect<F>(f: &F, mut lo: f64, mut hi: f64, rel_tol: f64) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    let flo = f(lo);
    let fhi = f(hi);
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo.signum() == fhi.signum() {
        return Err(Error::NoBracket { lo, hi });
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if (hi - lo) <= rel_tol * mid.abs() {
            return Ok(mid);
        }
        let fm = f(mid);
        if fm == 0.0 {
            return Ok(mid);
        }
        if fm.signum() == flo.signum() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Least-squares slope of ln(y) against ln(x). All inputs must be positive.
pub fn log_log_slope(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(Error::InvalidParameter(
            "slope fit needs two or more (x, y) pairs".into(),
        ));
    }
    if xs.iter().chain(ys.iter()).any(|&v| v <= 0.0) {
        return Err(Error::InvalidParameter(
            "log-log fit requires positive data".into(),
        ));
    }
    let n = xs.len() as f64;
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidParameter(
            "log-log fit has degenerate abscissae".into(),
        ));
    }
    Ok(sxy / sxx)
}
