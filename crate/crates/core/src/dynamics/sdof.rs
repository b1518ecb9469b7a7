//! Linear single-degree-of-freedom oscillator
//! `ẍ + 2ζωẋ + ω²x = ξ(t)` and its white-noise excitation.

use alloc::string::ToString;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use super::forcing::{samples, ForcingSeries};
use super::trajectory::Trajectory;
use crate::error::{invalid, Error, Result};
use crate::rng;
use crate::special::std_normal_quantile;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SDOFConfig {
    pub zeta: f64,
    pub omega: f64,
    /// Two-sided white-noise level: `E[ξ(t)ξ(t+τ)] = 2πS0 δ(τ)`.
    pub s0: f64,
}

impl SDOFConfig {
    pub fn new(zeta: f64, omega: f64, s0: f64) -> Result<Self> {
        if !(zeta > 0.0) {
            return Err(invalid("zeta", "damping ratio must be positive"));
        }
        if !(omega > 0.0) {
            return Err(invalid("omega", "natural frequency must be positive"));
        }
        if !(s0 >= 0.0) {
            return Err(invalid("s0", "noise intensity must be non-negative"));
        }
        Ok(Self { zeta, omega, s0 })
    }
}

/// Stationary displacement variance `πS0 / (2ζω³)`.
pub fn sdof_stationary_variance(zeta: f64, omega: f64, s0: f64) -> f64 {
    PI * s0 / (2.0 * zeta * omega * omega * omega)
}

/// Piecewise-constant band-limited white noise: i.i.d. `N(0, 2πS0/dt)`
/// samples on `[0, T]`.
pub fn generate_white_noise(s0: f64, dt: f64, duration: f64, seed: u64) -> ForcingSeries {
    let n = samples(duration, dt);
    if s0 == 0.0 {
        return ForcingSeries::new(dt, vec![0.0; n]);
    }
    let sd = libm::sqrt(2.0 * PI * s0 / dt);
    let mut g = rng::stream(seed, 3);
    let values = (0..n).map(|_| sd * std_normal_quantile(rng::open_unit(&mut g))).collect();
    ForcingSeries::new(dt, values)
}

/// Fourth-order Runge–Kutta integration from zero initial conditions.
pub fn simulate_sdof(c: &SDOFConfig, excitation: &ForcingSeries, dt: f64, duration: f64) -> Result<Trajectory> {
    simulate_sdof_from(c, excitation, dt, duration, 0.0, 0.0)
}

pub fn simulate_sdof_from(
    c: &SDOFConfig,
    excitation: &ForcingSeries,
    dt: f64,
    duration: f64,
    x0: f64,
    v0: f64,
) -> Result<Trajectory> {
    let limit = 0.02 * 2.0 * PI / c.omega;
    if !(dt > 0.0) || dt > limit {
        return Err(Error::StepTooLarge { dt, limit });
    }
    let n = samples(duration, dt);
    let (w2, cd) = (c.omega * c.omega, 2.0 * c.zeta * c.omega);
    let accel = |t: f64, x: f64, v: f64| excitation.at(t) - cd * v - w2 * x;
    let mut xs: Vec<f64> = Vec::with_capacity(n);
    let mut vs: Vec<f64> = Vec::with_capacity(n);
    let (mut x, mut v) = (x0, v0);
    xs.push(x);
    vs.push(v);
    for k in 1..n {
        let t = (k - 1) as f64 * dt;
        let h = 0.5 * dt;
        let (k1x, k1v) = (v, accel(t, x, v));
        let (k2x, k2v) = (v + h * k1v, accel(t + h, x + h * k1x, v + h * k1v));
        let (k3x, k3v) = (v + h * k2v, accel(t + h, x + h * k2x, v + h * k2v));
        let (k4x, k4v) = (v + dt * k3v, accel(t + dt, x + dt * k3x, v + dt * k3v));
        x += dt / 6.0 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x);
        v += dt / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
        if !(x.is_finite() && v.is_finite()) {
            return Err(Error::NonFiniteState { time: k as f64 * dt });
        }
        xs.push(x);
        vs.push(v);
    }
    Ok(Trajectory::new(dt, vec![("x".to_string(), xs), ("v".to_string(), vs)]))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_form_variance() {
        assert!((sdof_stationary_variance(0.05, 2.0, 1.0) - 3.926_990_816_987_241_4).abs() < 1e-12);
        assert_eq!(sdof_stationary_variance(0.05, 2.0, 0.0), 0.0);
        let r = sdof_stationary_variance(0.05, 2.0, 1.0) / sdof_stationary_variance(0.05, 4.0, 1.0);
        assert!((r - 8.0).abs() < 1e-12);
    }

    #[test]
    fn zero_input_stays_at_rest() {
        let c = SDOFConfig::new(0.05, 2.0, 1.0).unwrap();
        let t = simulate_sdof(&c, &ForcingSeries::zeros(0.01, 10.0), 0.01, 10.0).unwrap();
        assert!(t.channel("x").unwrap().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn free_vibration_log_decrement() {
        let (zeta, omega) = (0.05, 2.0);
        let c = SDOFConfig::new(zeta, omega, 0.0).unwrap();
        let dt = 0.001;
        let t = simulate_sdof_from(&c, &ForcingSeries::zeros(dt, 20.0), dt, 20.0, 1.0, 0.0).unwrap();
        let x = t.channel("x").unwrap();
        // successive positive peaks
        let peaks: Vec<f64> =
            (1..x.len() - 1).filter(|&k| x[k] > x[k - 1] && x[k] >= x[k + 1] && x[k] > 0.0).map(|k| x[k]).collect();
        let expected = 2.0 * PI * zeta / libm::sqrt(1.0 - zeta * zeta);
        for w in peaks.windows(2).take(4) {
            let dec = libm::log(w[0] / w[1]);
            assert!((dec - expected).abs() < 1e-3, "{dec} vs {expected}");
        }
    }

    #[test]
    fn step_load_settles_at_static_deflection() {
        let c = SDOFConfig::new(0.05, 2.0, 0.0).unwrap();
        let t = simulate_sdof(&c, &ForcingSeries::constant(0.01, 250.0, 1.0), 0.01, 250.0).unwrap();
        assert!((t.last("x").unwrap() - 0.25).abs() < 1e-8);
    }

    #[test]
    fn step_limit_enforced() {
        let c = SDOFConfig::new(0.05, 2.0, 1.0).unwrap();
        assert!(matches!(
            simulate_sdof(&c, &ForcingSeries::zeros(0.1, 1.0), 0.1, 1.0),
            Err(Error::StepTooLarge { .. })
        ));
        assert!(SDOFConfig::new(-0.05, 2.0, 1.0).is_err());
    }

    #[test]
    fn white_noise_level() {
        let w = generate_white_noise(1.0, 0.01, 1000.0, 17);
        let n = w.values.len() as f64;
        let var = w.values.iter().map(|v| v * v).sum::<f64>() / n;
        assert!((libm::sqrt(var) - libm::sqrt(200.0 * PI)).abs() / libm::sqrt(200.0 * PI) < 0.01);
        assert!(generate_white_noise(0.0, 0.01, 1.0, 1).values.iter().all(|&v| v == 0.0));
        assert_eq!(generate_white_noise(1.0, 0.01, 5.0, 3), generate_white_noise(1.0, 0.01, 5.0, 3));
    }

    #[test]
    fn ensemble_variance_reaches_stationary_value() {
        let c = SDOFConfig::new(0.05, 2.0, 1.0).unwrap();
        let runs = 2000;
        let mut acc = 0.0;
        for r in 0..runs {
            let w = generate_white_noise(1.0, 0.01, 30.0, 1000 + r);
            let x = simulate_sdof(&c, &w, 0.01, 30.0).unwrap().last("x").unwrap();
            acc += x * x;
        }
        let var = acc / runs as f64;
        let exact = sdof_stationary_variance(0.05, 2.0, 1.0);
        assert!((var - exact).abs() / exact < 0.10, "{var} vs {exact}");
    }
}
