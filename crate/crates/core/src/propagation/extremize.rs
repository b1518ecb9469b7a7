//! Pointwise extremization of a conditional-CDF family over epistemic
//! coordinates: min/max for intervals, optimal mixing for p-boxes.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::uncertainty::ScalarPBox;

/// Share of x values at which the family must be monotone in the p-box
/// coordinate before the scan counts as conclusive.
pub const MONOTONE_SHARE: f64 = 0.95;

fn check_family(family: &[Vec<f64>]) -> Result<usize> {
    let first = family.first().ok_or(Error::EmptyFamily)?;
    let n = first.len();
    if let Some(bad) = family.iter().find(|c| c.len() != n) {
        return Err(Error::DimensionMismatch { expected: n, found: bad.len() });
    }
    Ok(n)
}

/// Pointwise minimum and maximum of the family, made monotone.
pub fn extremize_interval(family: &[Vec<f64>]) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = check_family(family)?;
    let mut lower = vec![f64::INFINITY; n];
    let mut upper = vec![f64::NEG_INFINITY; n];
    for c in family {
        for k in 0..n {
            lower[k] = lower[k].min(c[k]);
            upper[k] = upper[k].max(c[k]);
        }
    }
    monotone_bounds(&mut lower, &mut upper);
    Ok((lower, upper))
}

/// Running max from the left on the upper curve and running min from the
/// right on the lower one: both corrections only widen the bounds.
pub fn monotone_bounds(lower: &mut [f64], upper: &mut [f64]) -> f64 {
    let mut fix: f64 = 0.0;
    let mut run: f64 = 0.0;
    for v in upper.iter_mut() {
        let m = v.min(1.0).max(run);
        fix = fix.max((m - *v).abs());
        *v = m;
        run = m;
    }
    let mut run: f64 = 1.0;
    for v in lower.iter_mut().rev() {
        let m = v.max(0.0).min(run);
        fix = fix.max((m - *v).abs());
        *v = m;
        run = m;
    }
    if fix > 1e-12 {
        log::info!("bound curves corrected to monotone by up to {fix:.3e}");
    }
    fix
}

/// Cumulative-mass limits for a distribution placed on `nodes`: the mass
/// on nodes `0..=k` lies in `[lo[k], hi[k]]`, with cell edges at the
/// midpoints between nodes. The last entry is exactly 1.
pub fn cell_limits(pbox: &ScalarPBox, nodes: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let k = nodes.len();
    let mut lo = Vec::with_capacity(k);
    let mut hi = Vec::with_capacity(k);
    for i in 0..k.saturating_sub(1) {
        let (l, u) = pbox.cdf_bounds_at(0.5 * (nodes[i] + nodes[i + 1]));
        lo.push(l);
        hi.push(u.max(l));
    }
    lo.push(1.0);
    hi.push(1.0);
    (lo, hi)
}

/// Node masses of the distribution whose cumulative masses are `cum`.
pub fn masses_from_cumulative(cum: &[f64]) -> Vec<f64> {
    let mut prev = 0.0;
    cum.iter()
        .map(|&c| {
            let w = (c - prev).max(0.0);
            prev = prev.max(c);
            w
        })
        .collect()
}

/// Largest mass the nodes in `member` can carry: cumulative masses jump to
/// their upper limit at members and move only when forced elsewhere.
fn reachable_mass(member: &[bool], lo: &[f64], hi: &[f64], cum: &mut [f64]) -> f64 {
    let mut prev = 0.0f64;
    let mut mass = 0.0;
    for k in 0..lo.len() {
        let c = if member[k] { hi[k].max(prev) } else { prev.max(lo[k]) };
        if member[k] {
            mass += c - prev;
        }
        cum[k] = c;
        prev = c;
    }
    mass
}

/// Maximizes `Σ w_k g_k` over node masses `w` whose cumulative sums stay
/// within `[lo, hi]`. Nodes are filled greedily in decreasing order of `g`,
/// each receiving the extra mass its inclusion makes reachable; the feasible
/// set is a base polytope, so the greedy allocation is optimal.
pub fn greedy_allocation(g: &[f64], lo: &[f64], hi: &[f64]) -> (f64, Vec<f64>) {
    let k = g.len();
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| g[b].total_cmp(&g[a]).then(a.cmp(&b)));
    let mut member = vec![false; k];
    let mut cum = vec![0.0; k];
    let mut w = vec![0.0; k];
    let mut prev = 0.0;
    for &i in &order {
        member[i] = true;
        let f = reachable_mass(&member, lo, hi, &mut cum);
        w[i] = (f - prev).max(0.0);
        prev = f;
    }
    let value = w.iter().zip(g).map(|(a, b)| a * b).sum();
    (value, w)
}

fn greedy_min(g: &[f64], lo: &[f64], hi: &[f64]) -> (f64, Vec<f64>) {
    let neg: Vec<f64> = g.iter().map(|v| -v).collect();
    let (v, w) = greedy_allocation(&neg, lo, hi);
    (-v, w)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PBoxExtremes {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    /// Share of x values at which the family is monotone in the coordinate.
    pub monotone_share: f64,
    /// Node masses of the two bounding input CDFs.
    pub upper_input_masses: Vec<f64>,
    pub lower_input_masses: Vec<f64>,
}

enum Trend {
    Flat,
    Up,
    Down,
    Mixed,
}

fn trend(g: &[f64]) -> Trend {
    let tol = 1e-12;
    let up = g.windows(2).all(|p| p[1] >= p[0] - tol);
    let down = g.windows(2).all(|p| p[1] <= p[0] + tol);
    match (up, down) {
        (true, true) => Trend::Flat,
        (true, false) => Trend::Up,
        (false, true) => Trend::Down,
        (false, false) => Trend::Mixed,
    }
}

/// Bounds of `∫ F(x | θ) dF_p(θ)` over every input CDF `F_p` inside `pbox`,
/// with `family[k]` the conditional CDF at `nodes[k]`. Where the family is
/// monotone in `θ` the optimum mixes with a bounding input CDF; elsewhere
/// the greedy allocation solves the discrete problem exactly.
pub fn extremize_pbox_input(family: &[Vec<f64>], nodes: &[f64], pbox: &ScalarPBox) -> Result<PBoxExtremes> {
    let n = check_family(family)?;
    if nodes.len() != family.len() {
        return Err(Error::DimensionMismatch { expected: family.len(), found: nodes.len() });
    }
    let (lo, hi) = cell_limits(pbox, nodes);
    let w_up = masses_from_cumulative(&hi);
    let w_lo = masses_from_cumulative(&lo);
    let mix = |w: &[f64], g: &[f64]| -> f64 { w.iter().zip(g).map(|(a, b)| a * b).sum() };
    let mut lower = vec![0.0; n];
    let mut upper = vec![0.0; n];
    let mut monotone = 0usize;
    let mut g = vec![0.0; family.len()];
    for x in 0..n {
        for (dst, c) in g.iter_mut().zip(family) {
            *dst = c[x];
        }
        match trend(&g) {
            Trend::Flat => {
                monotone += 1;
                upper[x] = mix(&w_up, &g);
                lower[x] = upper[x];
            }
            // small θ favoured by the upper input CDF
            Trend::Down => {
                monotone += 1;
                upper[x] = mix(&w_up, &g);
                lower[x] = mix(&w_lo, &g);
            }
            Trend::Up => {
                monotone += 1;
                upper[x] = mix(&w_lo, &g);
                lower[x] = mix(&w_up, &g);
            }
            Trend::Mixed => {
                upper[x] = greedy_allocation(&g, &lo, &hi).0;
                lower[x] = greedy_min(&g, &lo, &hi).0;
            }
        }
    }
    let share = monotone as f64 / n.max(1) as f64;
    if share < MONOTONE_SHARE {
        log::info!("monotonicity scan inconclusive ({:.1}% of x); general allocation used", 100.0 * share);
    }
    monotone_bounds(&mut lower, &mut upper);
    Ok(PBoxExtremes { lower, upper, monotone_share: share, upper_input_masses: w_up, lower_input_masses: w_lo })
}

/// Lower and upper value of a family tensor along one axis.
pub(crate) enum Reducer<'a> {
    Interval,
    PBox { lo: &'a [f64], hi: &'a [f64], w_up: &'a [f64], w_lo: &'a [f64] },
}

impl Reducer<'_> {
    fn reduce(&self, g: &[f64], upper: bool) -> f64 {
        match self {
            Reducer::Interval => {
                if upper {
                    g.iter().copied().fold(f64::NEG_INFINITY, f64::max)
                } else {
                    g.iter().copied().fold(f64::INFINITY, f64::min)
                }
            }
            Reducer::PBox { lo, hi, w_up, w_lo } => {
                let mix = |w: &[f64]| -> f64 { w.iter().zip(g).map(|(a, b)| a * b).sum() };
                match (trend(g), upper) {
                    (Trend::Flat | Trend::Down, true) => mix(w_up),
                    (Trend::Flat | Trend::Down, false) => mix(w_lo),
                    (Trend::Up, true) => mix(w_lo),
                    (Trend::Up, false) => mix(w_up),
                    (Trend::Mixed, true) => greedy_allocation(g, lo, hi).0,
                    (Trend::Mixed, false) => greedy_min(g, lo, hi).0,
                }
            }
        }
    }
}

/// Reduces values on a tensor grid (last axis fastest) one axis at a time,
/// from the last to the first, taking the upper or lower extreme.
pub(crate) fn reduce_tensor(values: &[f64], shape: &[usize], reducers: &[Reducer<'_>], upper: bool) -> f64 {
    let mut cur = values.to_vec();
    for ax in (0..shape.len()).rev() {
        let len = shape[ax];
        cur = cur.chunks(len).map(|g| reducers[ax].reduce(g, upper)).collect();
    }
    cur[0]
}
