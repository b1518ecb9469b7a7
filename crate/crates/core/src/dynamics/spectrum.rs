//! Interval power spectral density for ground acceleration and its
//! spectral-representation sampler.

use alloc::vec::Vec;
use core::f64::consts::PI;

use super::forcing::{samples, ForcingSeries};
use crate::error::{invalid, Error, Result};
use crate::quad;
use crate::rng;
use rand::Rng;

/// Fraction of the spectral mass kept below the sampling cutoff.
pub const CUTOFF_MASS: f64 = 0.999;
/// Minimum number of harmonics in a realization.
pub const MIN_HARMONICS: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IPSDConfig {
    pub sigma2: f64,
    pub rho0: f64,
    pub omega0: f64,
}

impl IPSDConfig {
    pub fn new(sigma2: f64, rho0: f64, omega0: f64) -> Result<Self> {
        if !(sigma2 > 0.0) {
            return Err(invalid("sigma2", "variance must be positive"));
        }
        if !(rho0 > 0.0) {
            return Err(invalid("rho0", "bandwidth must be positive"));
        }
        if !(omega0 > 0.0) {
            return Err(invalid("omega0", "predominant frequency must be positive"));
        }
        Ok(Self { sigma2, rho0, omega0 })
    }

    pub fn omega_l(&self) -> f64 {
        self.omega0 + 0.8 * self.rho0
    }

    pub fn omega_h(&self) -> f64 {
        0.1 * self.omega0
    }

    /// Spectral shape with unit normalization constant (two-sided, even in ω).
    pub fn shape(&self, w: f64) -> f64 {
        let (wl, wh, r, o) = (self.omega_l(), self.omega_h(), self.rho0, self.omega0);
        let w2 = w * w;
        let high_pass = w2 / (w2 + wh * wh);
        let wl2 = wl * wl;
        let low_pass = wl2 / (w2 * w2 + wl2 * wl2);
        let peaks = r / PI * (1.0 / (r * r + (w + o) * (w + o)) + 1.0 / (r * r + (w - o) * (w - o)));
        high_pass * low_pass * peaks
    }

    fn half_mass(&self) -> Result<f64> {
        let split = self.omega0 + 10.0 * self.rho0;
        let f = |w: f64| self.shape(w);
        let body = quad::integrate(f, 0.0, split, 0.0, 1e-10).map_err(|_| Error::DivergentSpectrum)?;
        let tail = quad::integrate_to_infinity(f, split, 0.0, 1e-10).map_err(|_| Error::DivergentSpectrum)?;
        let m = body + tail;
        if !(m.is_finite() && m > 0.0) {
            return Err(Error::DivergentSpectrum);
        }
        Ok(m)
    }
}

/// Normalization constant `β0 = σ² / ∫ shape(ω) dω` over the whole real line.
pub fn ipsd_normalize(c: &IPSDConfig) -> Result<f64> {
    Ok(c.sigma2 / (2.0 * c.half_mass()?))
}

/// Cosine-series sampler `ξ(t) = Σ √(4 S(ω_k) Δω) cos(ω_k t + φ_k)`.
#[derive(Debug, Clone)]
pub struct SpectralGenerator {
    pub config: IPSDConfig,
    pub beta0: f64,
    pub cutoff: f64,
    pub d_omega: f64,
    amplitudes: Vec<f64>,
}

impl SpectralGenerator {
    /// Builds a sampler whose harmonic spacing resolves records of length `duration`.
    pub fn new(config: IPSDConfig, duration: f64) -> Result<Self> {
        let beta0 = ipsd_normalize(&config)?;
        let half = config.half_mass()?;
        let f = |w: f64| config.shape(w);
        let h = 0.125 * config.rho0;
        let (mut cutoff, mut acc) = (0.0, 0.0);
        while acc < CUTOFF_MASS * half {
            acc += quad::integrate(f, cutoff, cutoff + h, 0.0, 1e-10).map_err(|_| Error::DivergentSpectrum)?;
            cutoff += h;
        }
        let k = MIN_HARMONICS.max(libm::ceil(cutoff * duration / PI) as usize);
        let d_omega = cutoff / k as f64;
        let amplitudes = (0..k)
            .map(|i| {
                let w = (i as f64 + 0.5) * d_omega;
                libm::sqrt(4.0 * beta0 * config.shape(w) * d_omega)
            })
            .collect();
        Ok(Self { config, beta0, cutoff, d_omega, amplitudes })
    }

    pub fn harmonics(&self) -> usize {
        self.amplitudes.len()
    }

    /// Two-sided PSD `β0 · shape(ω)`.
    pub fn psd(&self, w: f64) -> f64 {
        self.beta0 * self.config.shape(w)
    }

    /// Variance carried by the discrete harmonics, `Σ 2 S(ω_k) Δω`.
    pub fn discrete_variance(&self) -> f64 {
        self.amplitudes.iter().map(|a| 0.5 * a * a).sum()
    }

    pub fn realize(&self, dt: f64, duration: f64, seed: u64) -> ForcingSeries {
        let n = samples(duration, dt);
        let mut g = rng::stream(seed, 5);
        let mut values = alloc::vec![0.0; n];
        for (i, &a) in self.amplitudes.iter().enumerate() {
            let phase: f64 = 2.0 * PI * g.random::<f64>();
            let w = (i as f64 + 0.5) * self.d_omega;
            // unit phasor advanced by a fixed rotation each step
            let (sr, cr) = libm::sincos(w * dt);
            let (mut s, mut c) = libm::sincos(phase);
            for (k, v) in values.iter_mut().enumerate() {
                if k % 512 == 0 {
                    let (ss, cc) = libm::sincos(w * k as f64 * dt + phase);
                    s = ss;
                    c = cc;
                }
                *v += a * c;
                let c_next = c * cr - s * sr;
                s = s * cr + c * sr;
                c = c_next;
            }
        }
        ForcingSeries::new(dt, values)
    }
}

/// One realization of the normalized spectrum on `[0, duration]`.
pub fn generate_spectral_realization(c: &IPSDConfig, dt: f64, duration: f64, seed: u64) -> Result<ForcingSeries> {
    Ok(SpectralGenerator::new(*c, duration)?.realize(dt, duration, seed))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use rustfft::{num_complex::Complex, FftPlanner};

    fn nominal(omega0: f64) -> IPSDConfig {
        IPSDConfig::new(1.06, 17.33, omega0).unwrap()
    }

    #[test]
    fn shape_vanishes_at_origin_and_is_even() {
        let c = nominal(30.0);
        assert_eq!(c.shape(0.0), 0.0);
        for w in [1.0, 10.0, 30.0, 77.0] {
            assert!((c.shape(w) - c.shape(-w)).abs() <= 1e-15 * c.shape(w));
        }
    }

    #[test]
    fn normalized_integral_matches_variance() {
        for omega0 in [23.91, 30.0, 45.22] {
            let c = nominal(omega0);
            let b = ipsd_normalize(&c).unwrap();
            // brute-force trapezoid on a wide symmetric grid
            let (lim, n) = (4000.0, 4_000_000);
            let h = 2.0 * lim / n as f64;
            let mut s = 0.0;
            for i in 0..=n {
                let w = -lim + i as f64 * h;
                let wt = if i == 0 || i == n { 0.5 } else { 1.0 };
                s += wt * b * c.shape(w);
            }
            s *= h;
            assert!((s - 1.06).abs() / 1.06 < 1e-3, "{s}");
        }
    }

    #[test]
    fn beta0_is_linear_in_variance() {
        let a = ipsd_normalize(&IPSDConfig::new(1.06, 17.33, 30.0).unwrap()).unwrap();
        let b = ipsd_normalize(&IPSDConfig::new(2.12, 17.33, 30.0).unwrap()).unwrap();
        assert!((b / a - 2.0).abs() < 1e-12);
    }

    #[test]
    fn generator_settings() {
        let g = SpectralGenerator::new(nominal(45.22), 10.0).unwrap();
        assert!(g.harmonics() >= MIN_HARMONICS);
        assert!(g.cutoff < PI / 0.005);
        assert!((g.discrete_variance() - 1.06).abs() / 1.06 < 0.005);
    }

    #[test]
    fn determinism() {
        let c = nominal(30.0);
        let a = generate_spectral_realization(&c, 0.005, 2.0, 4).unwrap();
        let b = generate_spectral_realization(&c, 0.005, 2.0, 4).unwrap();
        assert_eq!(a, b);
        let d = generate_spectral_realization(&c, 0.005, 2.0, 5).unwrap();
        assert_ne!(a, d);
    }

    #[test]
    fn phasor_recurrence_matches_direct_cosines() {
        let c = nominal(30.0);
        let g = SpectralGenerator::new(c, 10.0).unwrap();
        let x = g.realize(0.005, 10.0, 9);
        let mut r = rng::stream(9, 5);
        let mut direct = vec![0.0; x.values.len()];
        for (i, &a) in g.amplitudes.iter().enumerate() {
            let phase: f64 = 2.0 * PI * r.random::<f64>();
            let w = (i as f64 + 0.5) * g.d_omega;
            for (k, v) in direct.iter_mut().enumerate() {
                *v += a * libm::cos(w * k as f64 * 0.005 + phase);
            }
        }
        let err = x.values.iter().zip(&direct).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(err < 1e-9, "{err}");
    }

    #[test]
    fn ensemble_variance_mid_duration() {
        let c = nominal(30.0);
        let g = SpectralGenerator::new(c, 10.0).unwrap();
        let runs = 2000;
        let mid = 1000;
        let mut acc = 0.0;
        for r in 0..runs {
            let x = g.realize(0.005, 10.0, 50_000 + r);
            acc += x.values[mid] * x.values[mid];
        }
        let var = acc / runs as f64;
        // single-instant estimator: standard error is √(2/2000) ≈ 3.2 %
        assert!((var - 1.06).abs() / 1.06 < 0.10, "{var}");
    }

    #[test]
    fn periodogram_matches_target_shape() {
        let omega0 = 30.0;
        let c = nominal(omega0);
        let (dt, duration) = (0.01, 40.95);
        let g = SpectralGenerator::new(c, duration).unwrap();
        let seg = 1024;
        let window: Vec<f64> =
            (0..seg).map(|k| 0.5 - 0.5 * libm::cos(2.0 * PI * k as f64 / (seg - 1) as f64)).collect();
        let wpow: f64 = window.iter().map(|w| w * w).sum();
        let mut planner = FftPlanner::<f64>::new();
        let fft = planner.plan_fft_forward(seg);
        let mut avg = vec![0.0; seg / 2];
        let mut count = 0.0;
        for r in 0..500 {
            let x = g.realize(dt, duration, 70_000 + r);
            for start in (0..=x.values.len() - seg).step_by(seg / 2) {
                let mut buf: Vec<Complex<f64>> =
                    (0..seg).map(|k| Complex::new(x.values[start + k] * window[k], 0.0)).collect();
                fft.process(&mut buf);
                for (j, a) in avg.iter_mut().enumerate() {
                    *a += buf[j].norm_sqr() * dt / (2.0 * PI * wpow);
                }
                count += 1.0;
            }
        }
        let dw = 2.0 * PI / (seg as f64 * dt);
        let (mut num, mut den) = (0.0, 0.0);
        for (j, a) in avg.iter().enumerate() {
            let w = j as f64 * dw;
            if w >= 0.2 * omega0 && w <= 2.0 * omega0 {
                let target = g.psd(w);
                num += (a / count - target) * (a / count - target);
                den += target * target;
            }
        }
        let rel = libm::sqrt(num / den);
        assert!(rel < 0.05, "{rel}");
    }
}
