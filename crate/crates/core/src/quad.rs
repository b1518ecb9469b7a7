//! Adaptive Gauss–Kronrod quadrature.

use crate::error::{Error, Result};

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
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] =
    [0.129_484_966_168_869_7, 0.279_705_391_489_276_7, 0.381_830_050_505_118_9, 0.417_959_183_673_469_4];

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = h * XGK[j];
        let pair = f(c - dx) + f(c + dx);
        kronrod += WGK[j] * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    (kronrod * h, ((kronrod - gauss) * h).abs())
}

/// Integrates `f` over `[a, b]` to `max(abs_tol, rel_tol * |I|)`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, abs_tol: f64, rel_tol: f64) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let (value, err) = gk15(&f, a, b);
    // Depth-first refinement with an explicit stack keeps this allocation free.
    let mut stack = [(0.0f64, 0.0f64, 0.0f64, 0.0f64); 64];
    let mut top = 0usize;
    stack[top] = (a, b, value, err);
    top += 1;
    let mut total = 0.0;
    let mut budget = 200_000usize;
    let global_tol = abs_tol.max(rel_tol * value.abs());
    while top > 0 {
        top -= 1;
        let (lo, hi, v, e) = stack[top];
        let width_share = ((hi - lo) / (b - a)).abs();
        if e <= global_tol * width_share.max(1e-12) || (hi - lo).abs() < 1e-14 * (b - a).abs() {
            total += v;
            continue;
        }
        if budget == 0 || top + 2 > stack.len() {
            return Err(Error::QuadratureFailure);
        }
        budget -= 1;
        let mid = 0.5 * (lo + hi);
        let left = gk15(&f, lo, mid);
        let right = gk15(&f, mid, hi);
        stack[top] = (lo, mid, left.0, left.1);
        stack[top + 1] = (mid, hi, right.0, right.1);
        top += 2;
    }
    if total.is_finite() {
        Ok(total)
    } else {
        Err(Error::QuadratureFailure)
    }
}

/// Integrates over `[a, ∞)` through the substitution `x = a + t / (1 - t)`.
pub fn integrate_to_infinity<F: Fn(f64) -> f64>(f: F, a: f64, abs_tol: f64, rel_tol: f64) -> Result<f64> {
    integrate(
        |t| {
            if t >= 1.0 {
                return 0.0;
            }
            let s = 1.0 - t;
            f(a + t / s) / (s * s)
        },
        0.0,
        1.0,
        abs_tol,
        rel_tol,
    )
}
