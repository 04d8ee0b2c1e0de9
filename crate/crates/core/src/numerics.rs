//! Shared numeric kernels: root bracketing and bisection, adaptive
//! Gauss-Kronrod quadrature, golden-section maximization, Euclidean
//! projection onto a capped simplex, and small statistics helpers.

use crate::{Error, Result};

/// Relative x-tolerance used for fixed-point and scalar equation roots.
pub const ROOT_REL_TOL: f64 = 1e-12;
/// Relative x-tolerance used for CDF-level roots (scaling points).
pub const CDF_ROOT_REL_TOL: f64 = 1e-6;
/// Absolute tolerance target for adaptive quadrature.
pub const QUAD_ABS_TOL: f64 = 1e-8;

/// Bisection for `f(x) = 0` on `[lo, hi]`, assuming `f(lo)` and `f(hi)`
/// have opposite signs (an endpoint equal to zero is returned directly).
/// Stops when the interval shrinks below `rel_tol` relative to the
/// midpoint magnitude (plus an absolute floor of the same size).
pub fn bisect<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, rel_tol: f64) -> Result<f64> {
    if !(lo < hi) {
        return Err(Error::BracketFailure(format!(
            "bisect needs lo < hi, got [{lo}, {hi}]"
        )));
    }
    let mut a = lo;
    let mut b = hi;
    let mut fa = f(a);
    let fb = f(b);
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(Error::BracketFailure(format!(
            "no sign change on [{a}, {b}]: f(lo) = {fa:e}, f(hi) = {fb:e}"
        )));
    }
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        let width = b - a;
        if width <= rel_tol * (mid.abs() + rel_tol) {
            return Ok(mid);
        }
        let fm = f(mid);
        if fm == 0.0 {
            return Ok(mid);
        }
        if fm.signum() == fa.signum() {
            a = mid;
            fa = fm;
        } else {
            b = mid;
        }
    }
    Ok(0.5 * (a + b))
}

/// Find `hi > lo` with `f(hi) > 0` by geometric growth, for increasing-ish
/// `f` with `f(lo) < 0`. Returns the bracket `(lo, hi)`.
pub fn grow_bracket<F: Fn(f64) -> f64>(f: F, lo: f64, first_step: f64) -> Result<(f64, f64)> {
    if !(first_step > 0.0) {
        return Err(Error::InvalidParam(format!(
            "bracket step must be positive, got {first_step}"
        )));
    }
    let mut step = first_step;
    let mut hi = lo + step;
    for _ in 0..200 {
        if f(hi) > 0.0 {
            return Ok((lo, hi));
        }
        step *= 2.0;
        hi = lo + step;
        if !hi.is_finite() {
            break;
        }
    }
    Err(Error::BracketFailure(format!(
        "no sign change found growing from {lo}"
    )))
}

// Gauss-Kronrod 7/15 nodes on [-1, 1] (positive half) and weights.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_2,
    0.063_092_092_629_978_56,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// One Gauss-Kronrod 7/15 panel: returns (15-point estimate, |K15 - G7|).
fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for j in 0..7 {
        let x = h * XGK[j];
        let fsum = f(c - x) + f(c + x);
        kronrod += WGK[j] * fsum;
        if j % 2 == 1 {
            gauss += WG[j / 2] * fsum;
        }
    }
    (kronrod * h, (kronrod - gauss).abs() * h)
}

fn integrate_rec<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    tol: f64,
    depth: u32,
) -> Result<f64> {
    let (est, err) = gk15(f, a, b);
    if err <= tol || b - a < 1e-15 * (a.abs() + b.abs() + 1.0) {
        return Ok(est);
    }
    if depth == 0 {
        return Err(Error::QuadratureFailure(format!(
            "panel [{a}, {b}] still has error {err:e} at maximum depth"
        )));
    }
    let mid = 0.5 * (a + b);
    let left = integrate_rec(f, a, mid, 0.5 * tol, depth - 1)?;
    let right = integrate_rec(f, mid, b, 0.5 * tol, depth - 1)?;
    Ok(left + right)
}

/// Adaptive Gauss-Kronrod integration of `f` over `[a, b]` to absolute
/// tolerance `abs_tol`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, abs_tol: f64) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    if !(a < b) {
        return Err(Error::InvalidParam(format!(
            "integration bounds out of order: [{a}, {b}]"
        )));
    }
    integrate_rec(&f, a, b, abs_tol, 48)
}

/// Golden-section search for the maximizer of a unimodal `f` on `[a, b]`.
/// Returns `(argmax, max)` with the argument located to `x_tol`.
pub fn golden_section_max<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, x_tol: f64) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut lo = a;
    let mut hi = b;
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while hi - lo > x_tol {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1);
        }
    }
    let xm = 0.5 * (lo + hi);
    (xm, f(xm))
}

/// Euclidean projection of `v` onto `{x >= 0, sum(x) <= cap}`.
///
/// If clipping negatives already lands inside the budget the clip is the
/// projection; otherwise the point is projected onto the face
/// `{x >= 0, sum(x) = cap}` by the usual sort-and-threshold rule.
pub fn project_simplex_cap(v: &[f64], cap: f64) -> Vec<f64> {
    let clipped: Vec<f64> = v.iter().map(|&x| x.max(0.0)).collect();
    let s: f64 = clipped.iter().sum();
    if s <= cap {
        return clipped;
    }
    let mut sorted = v.to_vec();
    sorted.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let mut cumsum = 0.0;
    let mut theta = 0.0;
    for (j, &u) in sorted.iter().enumerate() {
        cumsum += u;
        let cand = (cumsum - cap) / (j as f64 + 1.0);
        if u - cand > 0.0 {
            theta = cand;
        } else {
            break;
        }
    }
    v.iter().map(|&x| (x - theta).max(0.0)).collect()
}

/// Sample mean and standard error of the mean.
pub fn mean_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = xs.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|&x| (x - mean) * (x - mean)).sum::<f64>() / (n as f64 - 1.0);
    (mean, (var / n as f64).sqrt())
}
