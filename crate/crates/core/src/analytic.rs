//! Closed-form bounds for a white-noise driven linear oscillator whose
//! natural frequency is a split-normal probability box.

use core::f64::consts::PI;

use crate::error::{invalid, Error, Result};
use crate::quad;
use crate::special::{std_normal_cdf, std_normal_pdf};
use crate::uncertainty::{CdfCurve, ScalarPBox};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundKind {
    Upper,
    Lower,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SDOFOracleConfig {
    pub s0: f64,
    pub zeta: f64,
    pub mu1: f64,
    pub mu2: f64,
    pub sigma1: f64,
    pub sigma2: f64,
}

impl Default for SDOFOracleConfig {
    fn default() -> Self {
        Self { s0: 1.0, zeta: 0.05, mu1: 1.9, mu2: 2.1, sigma1: 0.1, sigma2: 0.2 }
    }
}

/// Reference solution for the stationary variance `Y1` and the stationary
/// displacement `Y2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SdofOracle {
    pub config: SDOFOracleConfig,
}

impl SdofOracle {
    pub fn new(config: SDOFOracleConfig) -> Result<Self> {
        let c = &config;
        if !(c.mu1 <= c.mu2) {
            return Err(invalid("mu1", "must not exceed mu2"));
        }
        if !(c.sigma1 > 0.0 && c.sigma2 > 0.0) {
            return Err(invalid("sigma", "spreads must be positive"));
        }
        if !(c.s0 > 0.0 && c.zeta > 0.0) {
            return Err(invalid("s0/zeta", "must be positive"));
        }
        Ok(Self { config })
    }

    pub fn input_curve(&self, kind: BoundKind) -> CdfCurve {
        let c = &self.config;
        match kind {
            BoundKind::Upper => CdfCurve::SplitNormal { center: c.mu1, std_below: c.sigma2, std_above: c.sigma1 },
            BoundKind::Lower => CdfCurve::SplitNormal { center: c.mu2, std_below: c.sigma1, std_above: c.sigma2 },
        }
    }

    pub fn input_pbox(&self) -> ScalarPBox {
        ScalarPBox::new(self.input_curve(BoundKind::Upper), self.input_curve(BoundKind::Lower))
    }

    pub fn input_pbox_cdf(&self, kind: BoundKind, omega: f64) -> f64 {
        self.input_curve(kind).eval(omega)
    }

    /// Piecewise derivative of an input bound.
    pub fn input_pbox_pdf(&self, kind: BoundKind, omega: f64) -> f64 {
        self.input_curve(kind).density(omega)
    }

    /// Stationary variance `πS0 / (2ζω³)`.
    pub fn y1_of_omega(&self, omega: f64) -> f64 {
        PI * self.config.s0 / (2.0 * self.config.zeta * omega * omega * omega)
    }

    pub fn omega_of_y1(&self, y1: f64) -> f64 {
        libm::cbrt(PI * self.config.s0 / (2.0 * self.config.zeta * y1))
    }

    /// `(lower, upper)` CDF bounds of `Y1`; `Y1` decreases in `ω`.
    pub fn y1_bounds(&self, y1: f64) -> Result<(f64, f64)> {
        if !(y1 > 0.0) {
            return Err(Error::NonPositive(y1));
        }
        let w = self.omega_of_y1(y1);
        Ok((1.0 - self.input_pbox_cdf(BoundKind::Upper, w), 1.0 - self.input_pbox_cdf(BoundKind::Lower, w)))
    }

    /// Zero-mean Gaussian density of `Y2` with variance `y1(ω)`.
    pub fn y2_conditional_pdf(&self, y2: f64, omega: f64) -> f64 {
        let s = libm::sqrt(self.y1_of_omega(omega));
        std_normal_pdf(y2 / s) / s
    }

    fn y2_conditional_cdf(&self, y2: f64, omega: f64) -> f64 {
        std_normal_cdf(y2 / libm::sqrt(self.y1_of_omega(omega)))
    }

    /// `∫ Φ(y2 / √y1(ω)) dF(ω)` with `F` one input bound.
    pub fn y2_mixture(&self, y2: f64, kind: BoundKind) -> Result<f64> {
        let c = &self.config;
        let lo = (c.mu1 - 8.0 * c.sigma2).max(0.0);
        let hi = c.mu2 + 8.0 * c.sigma2;
        let f = |w: f64| {
            if w <= 0.0 {
                return 0.0;
            }
            self.y2_conditional_cdf(y2, w) * self.input_pbox_pdf(kind, w)
        };
        let mut total = 0.0;
        let cuts = [lo, c.mu1.max(lo), c.mu2.max(lo), hi];
        for w in cuts.windows(2) {
            if w[1] > w[0] {
                total += quad::integrate(f, w[0], w[1], 1e-14, 1e-10).map_err(|_| Error::QuadratureFailure)?;
            }
        }
        Ok(total)
    }

    /// `(lower, upper)` CDF bounds of `Y2`. The conditional CDF decreases in
    /// `ω` for `y2 < 0` and increases for `y2 > 0`.
    pub fn y2_bounds(&self, y2: f64) -> Result<(f64, f64)> {
        if y2 == 0.0 {
            return Ok((0.5, 0.5));
        }
        let with_upper = self.y2_mixture(y2, BoundKind::Upper)?;
        let with_lower = self.y2_mixture(y2, BoundKind::Lower)?;
        if y2 < 0.0 {
            Ok((with_lower, with_upper))
        } else {
            Ok((with_upper, with_lower))
        }
    }
}
