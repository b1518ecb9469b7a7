use alloc::string::String;
use alloc::vec::Vec;

/// One CDF curve on the result's x grid, tagged with the epistemic values it
/// belongs to.
#[derive(Debug, Clone, PartialEq)]
pub struct CdfMember {
    pub label: String,
    pub theta: Vec<f64>,
    pub cdf: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Provenance {
    pub engine: String,
    /// Sample counts such as `("n_sel", 800)`.
    pub counts: Vec<(String, u64)>,
    pub seed: u64,
    /// Wall-clock seconds; filled in by callers that own a clock.
    pub runtime_secs: Option<f64>,
    pub notes: Vec<String>,
}

/// Output probability box: lower and upper CDFs on a common grid, and the
/// CDF family they bound.
#[derive(Debug, Clone, PartialEq)]
pub struct PBoxResult {
    pub x: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    /// Admissible CDFs; every member lies between the bounds.
    pub family: Vec<CdfMember>,
    /// Conditional CDFs at the epistemic evaluation nodes.
    pub node_conditionals: Vec<CdfMember>,
    pub epistemic_names: Vec<String>,
    pub provenance: Provenance,
}

impl PBoxResult {
    /// Largest amount by which a family member leaves the bounds.
    pub fn envelope_violation(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for m in &self.family {
            for k in 0..self.x.len() {
                worst = worst.max(self.lower[k] - m.cdf[k]).max(m.cdf[k] - self.upper[k]);
            }
        }
        worst
    }

    pub fn lower_at(&self, x: f64) -> f64 {
        interpolate_cdf(&self.x, &self.lower, x)
    }

    pub fn upper_at(&self, x: f64) -> f64 {
        interpolate_cdf(&self.x, &self.upper, x)
    }
}

/// Piecewise-linear CDF read-out: 0 left of the grid, the last value (taken
/// as 1 for a complete CDF) right of it.
pub fn interpolate_cdf(xs: &[f64], ps: &[f64], x: f64) -> f64 {
    let n = xs.len();
    if n == 0 || x < xs[0] {
        return 0.0;
    }
    if x >= xs[n - 1] {
        return ps[n - 1];
    }
    let k = xs.partition_point(|&v| v <= x) - 1;
    let span = xs[k + 1] - xs[k];
    if span <= 0.0 {
        return ps[k + 1];
    }
    ps[k] + (x - xs[k]) / span * (ps[k + 1] - ps[k])
}

/// Empirical CDF of `values` at each point of `grid`.
pub fn empirical_cdf(values: &[f64], grid: &[f64]) -> Vec<f64> {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    grid.iter().map(|&x| sorted.partition_point(|&v| v <= x) as f64 / n).collect()
}

/// Uniform grid of `nodes` points spanning `values`, widened by `pad` of the
/// range on each side.
pub fn span_grid(values: &[f64], nodes: usize, pad: f64) -> Vec<f64> {
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let w = (hi - lo).max(1e-12 * lo.abs().max(1.0));
    let (a, b) = (lo - pad * w, hi + pad * w);
    (0..nodes).map(|k| a + (b - a) * k as f64 / (nodes - 1) as f64).collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnvelopeReport {
    /// Largest excess of the inner upper CDF over the outer one, or of the
    /// outer lower CDF over the inner one.
    pub max_violation: f64,
    pub ks_lower: f64,
    pub ks_upper: f64,
    pub tol: f64,
    pub pass: bool,
}

/// Checks that `outer` encloses `inner` within `tol` on the union of both
/// grids.
pub fn envelope_check(outer: &PBoxResult, inner: &PBoxResult, tol: f64) -> EnvelopeReport {
    let mut xs: Vec<f64> = outer.x.iter().chain(&inner.x).copied().collect();
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    let (mut viol, mut ks_l, mut ks_u) = (0.0f64, 0.0f64, 0.0f64);
    for &x in &xs {
        let (ol, ou) = (outer.lower_at(x), outer.upper_at(x));
        let (il, iu) = (inner.lower_at(x), inner.upper_at(x));
        viol = viol.max(iu - ou).max(ol - il);
        ks_l = ks_l.max((ol - il).abs());
        ks_u = ks_u.max((ou - iu).abs());
    }
    EnvelopeReport { max_violation: viol, ks_lower: ks_l, ks_upper: ks_u, tol, pass: viol <= tol }
}

/// Sup-norm distance between two CDF curves on the union of their grids.
pub fn kolmogorov_distance(xa: &[f64], fa: &[f64], xb: &[f64], fb: &[f64]) -> f64 {
    let mut d: f64 = 0.0;
    for &x in xa.iter().chain(xb) {
        d = d.max((interpolate_cdf(xa, fa, x) - interpolate_cdf(xb, fb, x)).abs());
    }
    d
}
