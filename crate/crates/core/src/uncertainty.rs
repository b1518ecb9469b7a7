//! Uncertain input models: precise random variables, probability boxes and
//! intervals, plus the pseudo-densities placed on epistemic coordinates so a
//! single sampling loop covers them.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{invalid, Error, Result};
use crate::linalg::PointMatrix;
use crate::rng;
use crate::special::{std_normal_cdf, std_normal_pdf, std_normal_quantile};

/// Precise one-dimensional distribution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ScalarDistribution {
    Normal {
        mean: f64,
        std: f64,
    },
    /// `ln X ~ N(mu, sigma²)`.
    LogNormal {
        mu: f64,
        sigma: f64,
    },
    Uniform {
        lower: f64,
        upper: f64,
    },
}

impl ScalarDistribution {
    pub fn normal(mean: f64, std: f64) -> Result<Self> {
        if !(std > 0.0 && std.is_finite() && mean.is_finite()) {
            return Err(invalid("std", format!("normal needs finite mean and std > 0, got ({mean}, {std})")));
        }
        Ok(Self::Normal { mean, std })
    }

    pub fn standard_normal() -> Self {
        Self::Normal { mean: 0.0, std: 1.0 }
    }

    pub fn lognormal(mu: f64, sigma: f64) -> Result<Self> {
        if !(sigma > 0.0 && sigma.is_finite() && mu.is_finite()) {
            return Err(invalid("sigma", format!("lognormal needs sigma > 0, got {sigma}")));
        }
        Ok(Self::LogNormal { mu, sigma })
    }

    /// Lognormal with the given mean and coefficient of variation
    /// (exact moment matching).
    pub fn lognormal_from_moments(mean: f64, cov: f64) -> Result<Self> {
        if !(mean > 0.0 && cov > 0.0) {
            return Err(invalid(
                "mean",
                format!("lognormal moments need mean > 0 and c.o.v. > 0, got ({mean}, {cov})"),
            ));
        }
        let s2 = libm::log1p(cov * cov);
        Self::lognormal(libm::log(mean) - 0.5 * s2, libm::sqrt(s2))
    }

    pub fn uniform(lower: f64, upper: f64) -> Result<Self> {
        if !(lower < upper && lower.is_finite() && upper.is_finite()) {
            return Err(invalid("bounds", format!("uniform needs lower < upper, got [{lower}, {upper}]")));
        }
        Ok(Self::Uniform { lower, upper })
    }

    pub fn cdf(&self, x: f64) -> f64 {
        match *self {
            Self::Normal { mean, std } => std_normal_cdf((x - mean) / std),
            Self::LogNormal { mu, sigma } => {
                if x <= 0.0 {
                    0.0
                } else {
                    std_normal_cdf((libm::log(x) - mu) / sigma)
                }
            }
            Self::Uniform { lower, upper } => ((x - lower) / (upper - lower)).clamp(0.0, 1.0),
        }
    }

    pub fn pdf(&self, x: f64) -> f64 {
        match *self {
            Self::Normal { mean, std } => std_normal_pdf((x - mean) / std) / std,
            Self::LogNormal { mu, sigma } => {
                if x <= 0.0 {
                    0.0
                } else {
                    std_normal_pdf((libm::log(x) - mu) / sigma) / (sigma * x)
                }
            }
            Self::Uniform { lower, upper } => {
                if (lower..=upper).contains(&x) {
                    1.0 / (upper - lower)
                } else {
                    0.0
                }
            }
        }
    }

    pub fn quantile(&self, p: f64) -> f64 {
        match *self {
            Self::Normal { mean, std } => mean + std * std_normal_quantile(p),
            Self::LogNormal { mu, sigma } => libm::exp(mu + sigma * std_normal_quantile(p)),
            Self::Uniform { lower, upper } => lower + p.clamp(0.0, 1.0) * (upper - lower),
        }
    }

    pub fn mean(&self) -> f64 {
        match *self {
            Self::Normal { mean, .. } => mean,
            Self::LogNormal { mu, sigma } => libm::exp(mu + 0.5 * sigma * sigma),
            Self::Uniform { lower, upper } => 0.5 * (lower + upper),
        }
    }

    pub fn std_dev(&self) -> f64 {
        match *self {
            Self::Normal { std, .. } => std,
            Self::LogNormal { mu, sigma } => {
                let s2 = sigma * sigma;
                libm::sqrt(libm::expm1(s2)) * libm::exp(mu + 0.5 * s2)
            }
            Self::Uniform { lower, upper } => (upper - lower) / libm::sqrt(12.0),
        }
    }

    pub fn support(&self) -> (f64, f64) {
        match *self {
            Self::Normal { .. } => (f64::NEG_INFINITY, f64::INFINITY),
            Self::LogNormal { .. } => (0.0, f64::INFINITY),
            Self::Uniform { lower, upper } => (lower, upper),
        }
    }
}

/// A monotone curve used as one side of a probability box.
#[derive(Debug, Clone, PartialEq)]
pub enum CdfCurve {
    Distribution(ScalarDistribution),
    /// Normal CDF with different spreads on either side of `center`.
    SplitNormal {
        center: f64,
        std_below: f64,
        std_above: f64,
    },
    /// Piecewise-linear through `(xs[k], ps[k])`; 0 left of the table and
    /// `ps.last()` right of it.
    Tabulated {
        xs: Vec<f64>,
        ps: Vec<f64>,
    },
}

impl CdfCurve {
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            Self::Distribution(d) => d.cdf(x),
            Self::SplitNormal { center, std_below, std_above } => {
                let s = if x <= *center { *std_below } else { *std_above };
                std_normal_cdf((x - center) / s)
            }
            Self::Tabulated { xs, ps } => {
                if xs.is_empty() || x < xs[0] {
                    return 0.0;
                }
                let last = xs.len() - 1;
                if x >= xs[last] {
                    return ps[last];
                }
                let k = xs.partition_point(|&v| v <= x) - 1;
                let t = (x - xs[k]) / (xs[k + 1] - xs[k]);
                ps[k] + t * (ps[k + 1] - ps[k])
            }
        }
    }

    /// Density of the curve (derivative), where it exists.
    pub fn density(&self, x: f64) -> f64 {
        match self {
            Self::Distribution(d) => d.pdf(x),
            Self::SplitNormal { center, std_below, std_above } => {
                let s = if x <= *center { *std_below } else { *std_above };
                std_normal_pdf((x - center) / s) / s
            }
            Self::Tabulated { xs, ps } => {
                if xs.len() < 2 || x < xs[0] || x >= xs[xs.len() - 1] {
                    return 0.0;
                }
                let k = xs.partition_point(|&v| v <= x) - 1;
                (ps[k + 1] - ps[k]) / (xs[k + 1] - xs[k])
            }
        }
    }

    pub fn quantile(&self, p: f64) -> f64 {
        match self {
            Self::Distribution(d) => d.quantile(p),
            Self::SplitNormal { center, std_below, std_above } => {
                let z = std_normal_quantile(p);
                center + z * if z <= 0.0 { *std_below } else { *std_above }
            }
            Self::Tabulated { xs, ps } => {
                if xs.is_empty() {
                    return f64::NAN;
                }
                if p <= ps[0] {
                    return xs[0];
                }
                let k = ps.partition_point(|&v| v < p);
                if k >= ps.len() {
                    return xs[xs.len() - 1];
                }
                let (p0, p1) = (ps[k - 1], ps[k]);
                if p1 == p0 {
                    xs[k - 1]
                } else {
                    xs[k - 1] + (p - p0) / (p1 - p0) * (xs[k] - xs[k - 1])
                }
            }
        }
    }

    fn support(&self) -> (f64, f64) {
        match self {
            Self::Distribution(d) => d.support(),
            Self::SplitNormal { .. } => (f64::NEG_INFINITY, f64::INFINITY),
            Self::Tabulated { xs, .. } => {
                (xs.first().copied().unwrap_or(f64::NAN), xs.last().copied().unwrap_or(f64::NAN))
            }
        }
    }
}

/// Admissible family of a p-box.
#[derive(Debug, Clone, PartialEq)]
pub enum Family {
    DistributionFree,
    Parametric(String),
}

/// Closed interval bound on a moment; `None` means unconstrained.
pub type MomentBound = Option<(f64, f64)>;

/// Probability box: every admissible CDF lies between `lower` and `upper`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarPBox {
    pub upper: CdfCurve,
    pub lower: CdfCurve,
    /// Stored and validated; not used to tighten propagated bounds.
    pub mean: MomentBound,
    pub variance: MomentBound,
    pub family: Family,
    pub support: (f64, f64),
}

const PROBE_POINTS: usize = 1024;
const LIMIT_TOL: f64 = 1e-6;
const ORDER_TOL: f64 = 1e-12;

impl ScalarPBox {
    /// Distribution-free p-box between two curves. The support is the hull of
    /// the curves' supports.
    pub fn new(upper: CdfCurve, lower: CdfCurve) -> Self {
        let (a0, a1) = upper.support();
        let (b0, b1) = lower.support();
        Self {
            upper,
            lower,
            mean: None,
            variance: None,
            family: Family::DistributionFree,
            support: (a0.min(b0), a1.max(b1)),
        }
    }

    /// P-box with identical bounds (a precise distribution).
    pub fn precise(dist: ScalarDistribution) -> Self {
        Self::new(CdfCurve::Distribution(dist), CdfCurve::Distribution(dist))
    }

    pub fn with_mean(mut self, lo: f64, hi: f64) -> Self {
        self.mean = Some((lo, hi));
        self
    }

    pub fn with_variance(mut self, lo: f64, hi: f64) -> Self {
        self.variance = Some((lo, hi));
        self
    }

    pub fn with_family(mut self, family: Family) -> Self {
        self.family = family;
        self
    }

    /// `(F̲(x), F̄(x))`, clamped to [0, 1].
    pub fn cdf_bounds_at(&self, x: f64) -> (f64, f64) {
        (self.lower.eval(x).clamp(0.0, 1.0), self.upper.eval(x).clamp(0.0, 1.0))
    }

    /// Probe interval: the declared support where finite, otherwise far
    /// quantiles of the bounding curves.
    fn probe_range(&self) -> (f64, f64) {
        let (s0, s1) = self.support;
        let lo = if s0.is_finite() { s0 } else { self.upper.quantile(1e-12) };
        let hi = if s1.is_finite() { s1 } else { self.lower.quantile(1.0 - 1e-12) };
        let pad = 1e-3 * (hi - lo).abs().max(1e-12);
        (lo - pad, hi + pad)
    }

    /// Checks ordering, monotonicity and limits on a dense probe grid.
    pub fn validate(&self) -> Result<()> {
        let (lo, hi) = self.probe_range();
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::BadLimits { curve: "p-box", detail: format!("unusable support [{lo}, {hi}]") });
        }
        let mut prev = (f64::NEG_INFINITY, f64::NEG_INFINITY);
        for k in 0..PROBE_POINTS {
            let x = lo + (hi - lo) * k as f64 / (PROBE_POINTS - 1) as f64;
            let fl = self.lower.eval(x);
            let fu = self.upper.eval(x);
            for (curve, v) in [("lower", fl), ("upper", fu)] {
                if !(0.0..=1.0).contains(&v) {
                    return Err(Error::BadLimits { curve, detail: format!("value {v} outside [0, 1] at x = {x}") });
                }
            }
            if fl > fu + ORDER_TOL {
                return Err(Error::CrossingBounds { x, lower: fl, upper: fu });
            }
            if fl < prev.0 - ORDER_TOL {
                return Err(Error::NonMonotone { curve: "lower", x });
            }
            if fu < prev.1 - ORDER_TOL {
                return Err(Error::NonMonotone { curve: "upper", x });
            }
            prev = (fl, fu);
        }
        let left = self.upper.eval(lo);
        if left > LIMIT_TOL {
            return Err(Error::BadLimits { curve: "upper", detail: format!("F(x) = {left} at the left end") });
        }
        let right = self.lower.eval(hi);
        if right < 1.0 - LIMIT_TOL {
            return Err(Error::BadLimits { curve: "lower", detail: format!("F(x) = {right} at the right end") });
        }
        for (name, b) in [("mean", self.mean), ("variance", self.variance)] {
            if let Some((a, c)) = b {
                if !(a <= c) {
                    return Err(invalid(
                        if name == "mean" { "mean" } else { "variance" },
                        format!("empty interval [{a}, {c}]"),
                    ));
                }
            }
        }
        if let Some((a, _)) = self.variance {
            if a < 0.0 {
                return Err(invalid("variance", "negative lower bound"));
            }
        }
        Ok(())
    }

    /// Support truncated at tail probability `eps`: `F̄(lo) = eps`,
    /// `F̲(hi) = 1 - eps`.
    pub fn truncated_support(&self, eps: f64) -> (f64, f64) {
        (self.upper.quantile(eps), self.lower.quantile(1.0 - eps))
    }
}

/// Interval-valued parameter `[lower, upper]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntervalParam {
    pub lower: f64,
    pub upper: f64,
}

impl IntervalParam {
    pub fn new(lower: f64, upper: f64) -> Result<Self> {
        if !(lower <= upper && lower.is_finite() && upper.is_finite()) {
            return Err(invalid("interval", format!("needs finite lower <= upper, got [{lower}, {upper}]")));
        }
        Ok(Self { lower, upper })
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }
}

pub const DEFAULT_TAIL_EPS: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq)]
pub enum EpistemicKind {
    Interval(IntervalParam),
    PBox { pbox: ScalarPBox, tail_eps: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpistemicCoord {
    pub name: String,
    pub kind: EpistemicKind,
}

impl EpistemicCoord {
    pub fn interval(name: impl Into<String>, param: IntervalParam) -> Self {
        Self { name: name.into(), kind: EpistemicKind::Interval(param) }
    }

    pub fn pbox(name: impl Into<String>, pbox: ScalarPBox) -> Self {
        Self { name: name.into(), kind: EpistemicKind::PBox { pbox, tail_eps: DEFAULT_TAIL_EPS } }
    }

    pub fn with_tail_eps(mut self, eps: f64) -> Self {
        if let EpistemicKind::PBox { tail_eps, .. } = &mut self.kind {
            *tail_eps = eps;
        }
        self
    }

    pub fn is_pbox(&self) -> bool {
        matches!(self.kind, EpistemicKind::PBox { .. })
    }

    /// Bounded domain of the coordinate: the interval itself, or the p-box
    /// support truncated at its tail probability.
    pub fn domain(&self) -> Result<(f64, f64)> {
        let (lo, hi) = match &self.kind {
            EpistemicKind::Interval(p) => (p.lower, p.upper),
            EpistemicKind::PBox { pbox, tail_eps } => pbox.truncated_support(*tail_eps),
        };
        if lo.is_finite() && hi.is_finite() && lo <= hi {
            Ok((lo, hi))
        } else {
            Err(Error::UnboundedSupport { name: self.name.clone() })
        }
    }
}

/// Ordered epistemic coordinates.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct EpistemicVector {
    pub coords: Vec<EpistemicCoord>,
}

impl EpistemicVector {
    pub fn new(coords: Vec<EpistemicCoord>) -> Self {
        Self { coords }
    }

    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }
}

/// Per-coordinate pseudo-density; the joint density is the product.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PseudoCoord {
    Uniform {
        lower: f64,
        upper: f64,
    },
    /// Zero-width coordinate, carried as a fixed parameter.
    Fixed(f64),
}

impl PseudoCoord {
    pub fn density(&self, x: f64) -> f64 {
        match *self {
            Self::Uniform { lower, upper } => {
                if (lower..=upper).contains(&x) {
                    1.0 / (upper - lower)
                } else {
                    0.0
                }
            }
            Self::Fixed(_) => 0.0,
        }
    }

    /// Integral over the support; analytic for the uniform family.
    pub fn mass(&self) -> f64 {
        match *self {
            Self::Uniform { lower, upper } => (upper - lower) * (1.0 / (upper - lower)),
            Self::Fixed(_) => 1.0,
        }
    }

    pub fn as_distribution(&self) -> Option<ScalarDistribution> {
        match *self {
            Self::Uniform { lower, upper } => Some(ScalarDistribution::Uniform { lower, upper }),
            Self::Fixed(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PseudoDensity {
    pub coords: Vec<PseudoCoord>,
}

impl PseudoDensity {
    pub fn density(&self, theta: &[f64]) -> f64 {
        self.coords
            .iter()
            .zip(theta)
            .filter(|(c, _)| !matches!(c, PseudoCoord::Fixed(_)))
            .map(|(c, &t)| c.density(t))
            .product()
    }

    /// Widens every uniform coordinate by `pads[k]` on both sides.
    pub fn padded(&self, pads: &[f64]) -> Self {
        let coords = self
            .coords
            .iter()
            .zip(pads)
            .map(|(c, &p)| match *c {
                PseudoCoord::Uniform { lower, upper } => PseudoCoord::Uniform { lower: lower - p, upper: upper + p },
                fixed => fixed,
            })
            .collect();
        Self { coords }
    }
}

/// Uniform pseudo-density over each coordinate's bounded domain.
pub fn assign_pseudo_density(e: &EpistemicVector) -> Result<PseudoDensity> {
    let coords = e
        .coords
        .iter()
        .map(|c| {
            let (lo, hi) = c.domain()?;
            Ok(if hi > lo { PseudoCoord::Uniform { lower: lo, upper: hi } } else { PseudoCoord::Fixed(lo) })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(PseudoDensity { coords })
}

/// `n` independent joint draws (rows) from independent marginals, by inverse
/// CDF. Bitwise reproducible for a fixed seed.
pub fn sample_aleatory(dists: &[ScalarDistribution], n: usize, seed: u64) -> PointMatrix {
    let mut rng = rng::stream(seed, 0);
    let mut out = PointMatrix::zeros(n, dists.len());
    for i in 0..n {
        for (j, d) in dists.iter().enumerate() {
            out.set(i, j, d.quantile(rng::open_unit(&mut rng)));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn eq33() -> ScalarPBox {
        ScalarPBox::new(
            CdfCurve::SplitNormal { center: 1.9, std_below: 0.2, std_above: 0.1 },
            CdfCurve::SplitNormal { center: 2.1, std_below: 0.1, std_above: 0.2 },
        )
    }

    #[test]
    fn split_normal_pbox_is_valid() {
        eq33().validate().unwrap();
    }

    #[test]
    fn degenerate_pbox_is_valid() {
        ScalarPBox::precise(ScalarDistribution::standard_normal()).validate().unwrap();
    }

    #[test]
    fn swapped_bounds_cross() {
        let p = eq33();
        let swapped = ScalarPBox::new(p.lower.clone(), p.upper.clone());
        assert!(matches!(swapped.validate(), Err(Error::CrossingBounds { .. })));
    }

    #[test]
    fn non_monotone_and_bad_limits() {
        let bumpy = CdfCurve::Tabulated { xs: vec![0.0, 1.0, 2.0, 3.0], ps: vec![0.0, 0.6, 0.4, 1.0] };
        let p = ScalarPBox::new(bumpy.clone(), bumpy);
        assert!(matches!(p.validate(), Err(Error::NonMonotone { .. })));
        let short = CdfCurve::Tabulated { xs: vec![0.0, 1.0], ps: vec![0.0, 0.9] };
        let p = ScalarPBox::new(short.clone(), short);
        assert!(matches!(p.validate(), Err(Error::BadLimits { .. })));
    }

    #[test]
    fn bounds_at_points() {
        let p = eq33();
        assert_eq!(p.cdf_bounds_at(1.9).1, 0.5);
        assert!((p.cdf_bounds_at(2.3).0 - 0.841_344_746_068_542_9).abs() < 1e-14);
        let tab = CdfCurve::Tabulated { xs: vec![0.0, 1.0], ps: vec![0.0, 1.0] };
        let q = ScalarPBox::new(tab.clone(), tab);
        assert_eq!(q.cdf_bounds_at(-3.0), (0.0, 0.0));
    }

    #[test]
    fn pseudo_density_for_interval_and_point() {
        let e = EpistemicVector::new(vec![
            EpistemicCoord::interval("omega0", IntervalParam::new(23.91, 45.22).unwrap()),
            EpistemicCoord::interval("fixed", IntervalParam::new(3.0, 3.0).unwrap()),
        ]);
        let pd = assign_pseudo_density(&e).unwrap();
        assert!((pd.coords[0].density(30.0) - 1.0 / 21.31).abs() < 1e-12);
        assert_eq!(pd.coords[1], PseudoCoord::Fixed(3.0));
        assert!((pd.coords[0].mass() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn pseudo_density_for_truncated_pbox() {
        let e = EpistemicVector::new(vec![EpistemicCoord::pbox("omega", eq33())]);
        let pd = assign_pseudo_density(&e).unwrap();
        let PseudoCoord::Uniform { lower, upper } = pd.coords[0] else { panic!() };
        // F̄(lower) = 1e-4 and F̲(upper) = 1 - 1e-4, solved independently by bisection.
        let solve = |f: &dyn Fn(f64) -> f64, target: f64| {
            let (mut a, mut b) = (0.0, 4.0);
            for _ in 0..200 {
                let m = 0.5 * (a + b);
                if f(m) < target {
                    a = m
                } else {
                    b = m
                }
            }
            0.5 * (a + b)
        };
        let p = eq33();
        let lo = solve(&|x| p.upper.eval(x), 1e-4);
        let hi = solve(&|x| p.lower.eval(x), 1.0 - 1e-4);
        assert!((lower - lo).abs() < 1e-10 && (upper - hi).abs() < 1e-10);
        assert!((lower - 1.156).abs() < 1e-3 && (upper - 2.844).abs() < 1e-3);
    }

    #[test]
    fn unbounded_pbox_support_is_rejected() {
        let e = EpistemicVector::new(vec![EpistemicCoord::pbox("x", eq33()).with_tail_eps(0.0)]);
        assert!(matches!(assign_pseudo_density(&e), Err(Error::UnboundedSupport { .. })));
    }

    #[test]
    fn sampling_examples() {
        let u = ScalarDistribution::uniform(0.7, 1.3).unwrap();
        let s = sample_aleatory(&[u], 3, 9);
        assert_eq!(s.rows(), 3);
        assert!(s.as_flat().iter().all(|v| (0.7..=1.3).contains(v)));
        assert_eq!(sample_aleatory(&[u], 0, 9).rows(), 0);
        assert_eq!(s, sample_aleatory(&[u], 3, 9));
    }

    #[test]
    fn lognormal_moment_conversion() {
        let d = ScalarDistribution::lognormal_from_moments(1.0, 0.15).unwrap();
        let ScalarDistribution::LogNormal { mu, sigma } = d else { panic!() };
        assert!((mu + 0.5 * libm::log(1.0 + 0.0225)).abs() < 1e-15);
        assert!((sigma - libm::sqrt(libm::log(1.0 + 0.0225))).abs() < 1e-15);
        assert!((d.mean() - 1.0).abs() < 1e-14);
        assert!((d.std_dev() - 0.15).abs() < 1e-14);
        let n = 1_000_000;
        let s = sample_aleatory(&[d], n, 4);
        let mean = s.as_flat().iter().sum::<f64>() / n as f64;
        assert!((mean - 1.0).abs() < 0.01);
    }

    #[test]
    fn invalid_parameters() {
        assert!(ScalarDistribution::normal(0.0, 0.0).is_err());
        assert!(ScalarDistribution::uniform(1.0, 1.0).is_err());
        assert!(IntervalParam::new(2.0, 1.0).is_err());
    }
}
