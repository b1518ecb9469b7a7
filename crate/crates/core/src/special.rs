//! Standard normal utilities.

use core::f64::consts::{FRAC_1_SQRT_2, PI};

const FRAC_1_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// Standard normal density.
pub fn std_normal_pdf(x: f64) -> f64 {
    FRAC_1_SQRT_2PI * libm::exp(-0.5 * x * x)
}

/// Standard normal CDF, evaluated through the complementary error function
/// so both tails keep full relative accuracy.
pub fn std_normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x * FRAC_1_SQRT_2)
}

/// Standard normal quantile. Rational initial guess refined by one Halley
/// step against [`std_normal_cdf`]; accurate to a few ulps on (0, 1).
pub fn std_normal_quantile(p: f64) -> f64 {
    if p.is_nan() {
        return f64::NAN;
    }
    if p <= 0.0 {
        return f64::NEG_INFINITY;
    }
    if p >= 1.0 {
        return f64::INFINITY;
    }
    const A: [f64; 6] = [
        -3.969_683_028_665_376e1,
        2.209_460_984_245_205e2,
        -2.759_285_104_469_687e2,
        1.383_577_518_672_69e2,
        -3.066_479_806_614_716e1,
        2.506_628_277_459_239,
    ];
    const B: [f64; 5] = [
        -5.447_609_879_822_406e1,
        1.615_858_368_580_409e2,
        -1.556_989_798_598_866e2,
        6.680_131_188_771_972e1,
        -1.328_068_155_288_572e1,
    ];
    const C: [f64; 6] = [
        -7.784_894_002_430_293e-3,
        -3.223_964_580_411_365e-1,
        -2.400_758_277_161_838,
        -2.549_732_539_343_734,
        4.374_664_141_464_968,
        2.938_163_982_698_783,
    ];
    const D: [f64; 4] =
        [7.784_695_709_041_462e-3, 3.224_671_290_700_398e-1, 2.445_134_137_142_996, 3.754_408_661_907_416];
    const P_LOW: f64 = 0.02425;
    let x = if p < P_LOW {
        let q = libm::sqrt(-2.0 * libm::log(p));
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if p <= 1.0 - P_LOW {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        let q = libm::sqrt(-2.0 * libm::log(1.0 - p));
        -(((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    };
    // Halley refinement; the residual is formed in the smaller tail.
    let e = if x < 0.0 { std_normal_cdf(x) - p } else { (1.0 - p) - std_normal_cdf(-x) };
    let u = e * libm::sqrt(2.0 * PI) * libm::exp(0.5 * x * x);
    x - u / (1.0 + 0.5 * x * u)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_values() {
        assert_eq!(std_normal_cdf(0.0), 0.5);
        assert!((std_normal_cdf(1.0) - 0.841_344_746_068_542_9).abs() < 1e-15);
        assert!((std_normal_cdf(-1.0) - 0.158_655_253_931_457_05).abs() < 1e-15);
        assert!((std_normal_pdf(0.0) - FRAC_1_SQRT_2PI).abs() < 1e-17);
    }

    #[test]
    fn symmetry_to_machine_precision() {
        for k in 0..=400 {
            let x = -10.0 + 0.05 * k as f64;
            let s = std_normal_cdf(x) + std_normal_cdf(-x) - 1.0;
            assert!(s.abs() <= 1e-15, "x = {x}: {s:e}");
        }
    }

    #[test]
    fn derivative_matches_density() {
        let h = 1e-8;
        for k in 0..=80 {
            let x = -4.0 + 0.1 * k as f64;
            let fd = (std_normal_cdf(x + h) - std_normal_cdf(x - h)) / (2.0 * h);
            assert!((fd - std_normal_pdf(x)).abs() < 1e-7, "x = {x}");
        }
    }

    #[test]
    fn quantile_inverts_cdf() {
        assert!((std_normal_quantile(0.25) + 0.674_489_750_196_081_7).abs() < 1e-14);
        assert!((std_normal_quantile(0.75) - 0.674_489_750_196_081_7).abs() < 1e-14);
        assert_eq!(std_normal_quantile(0.5), 0.0);
        for k in 1..1000 {
            let p = k as f64 / 1000.0;
            let x = std_normal_quantile(p);
            assert!((std_normal_cdf(x) - p).abs() < 2e-16 * p.max(1e-3) * 1e3, "p = {p}");
        }
        for &p in &[1e-12, 1e-8, 1e-4] {
            let x = std_normal_quantile(p);
            assert!(((std_normal_cdf(x) - p) / p).abs() < 1e-12);
        }
    }
}
