//! Representative point sets: unit-hypercube designs mapped through the
//! marginal quantiles, Voronoi-cell probabilities estimated on a Monte Carlo
//! pool, and the cumulative-probability rearrangement of coordinates.

use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use rand::seq::SliceRandom;

use crate::error::{Error, Result};
use crate::exec::Executor;
use crate::linalg::PointMatrix;
use crate::rng;
use crate::uncertainty::ScalarDistribution;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strategy {
    /// Randomly shifted Halton sequence.
    LowDiscrepancy,
    LatinHypercube,
    PlainMc,
}

/// How assigned probabilities are obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Assignment {
    /// Voronoi-cell probabilities, rearrangement, and one re-weighting pass.
    Voronoi,
    /// Every point weighs `1 / n_sel`.
    Equal,
}

pub const POOL_FACTOR: usize = 1000;
pub const POOL_CAP: usize = 10_000_000;
const POOL_CHUNK: usize = 1 << 16;

pub fn default_pool_size(n_sel: usize) -> usize {
    n_sel.saturating_mul(POOL_FACTOR).min(POOL_CAP)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PointSetMeta {
    pub strategy: Strategy,
    pub assignment: Assignment,
    pub seed: u64,
    pub pool_size: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RepresentativePointSet {
    pub points: PointMatrix,
    pub probabilities: Vec<f64>,
    pub meta: PointSetMeta,
}

const PRIMES: [u32; 64] = [
    2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89, 97, 101, 103, 107, 109,
    113, 127, 131, 137, 139, 149, 151, 157, 163, 167, 173, 179, 181, 191, 193, 197, 199, 211, 223, 227, 229, 233, 239,
    241, 251, 257, 263, 269, 271, 277, 281, 283, 293, 307, 311,
];

fn radical_inverse(mut i: u64, base: u32) -> f64 {
    let b = base as u64;
    let inv = 1.0 / base as f64;
    let mut f = inv;
    let mut r = 0.0;
    while i > 0 {
        r += f * (i % b) as f64;
        i /= b;
        f *= inv;
    }
    r
}

fn clamp_open(u: f64) -> f64 {
    const EPS: f64 = 1.0 / (1u64 << 53) as f64;
    u.clamp(EPS, 1.0 - EPS)
}

/// Unit-hypercube design of `n` points in `d` dimensions.
pub fn unit_design(n: usize, d: usize, strategy: Strategy, seed: u64) -> Result<PointMatrix> {
    let mut rng = rng::stream(seed, 1);
    let mut out = PointMatrix::zeros(n, d);
    match strategy {
        Strategy::LowDiscrepancy => {
            if d > PRIMES.len() {
                return Err(Error::Unsupported(alloc::format!("Halton design limited to {} dimensions", PRIMES.len())));
            }
            let shifts: Vec<f64> = (0..d).map(|_| rng::open_unit(&mut rng)).collect();
            for i in 0..n {
                for j in 0..d {
                    let u = radical_inverse(i as u64 + 1, PRIMES[j]) + shifts[j];
                    out.set(i, j, clamp_open(u - libm::floor(u)));
                }
            }
        }
        Strategy::LatinHypercube => {
            for j in 0..d {
                let mut perm: Vec<usize> = (0..n).collect();
                perm.shuffle(&mut rng);
                for (i, &cell) in perm.iter().enumerate() {
                    let u = (cell as f64 + rng::open_unit(&mut rng)) / n as f64;
                    out.set(i, j, clamp_open(u));
                }
            }
        }
        Strategy::PlainMc => {
            for i in 0..n {
                for j in 0..d {
                    out.set(i, j, rng::open_unit(&mut rng));
                }
            }
        }
    }
    Ok(out)
}

/// Representative points: a unit design mapped through the inverse marginal
/// CDFs.
pub fn generate_points(
    space: &[ScalarDistribution],
    n_sel: usize,
    strategy: Strategy,
    seed: u64,
) -> Result<PointMatrix> {
    let mut pts = unit_design(n_sel, space.len(), strategy, seed)?;
    for i in 0..n_sel {
        for (j, d) in space.iter().enumerate() {
            let u = pts.get(i, j);
            pts.set(i, j, d.quantile(u));
        }
    }
    Ok(pts)
}

/// Rescales probabilities to sum to one and nudges the largest entry until the
/// index-order floating point sum is exactly 1.
pub fn renormalize_exact(p: &mut [f64]) {
    if p.is_empty() {
        return;
    }
    let s: f64 = p.iter().sum();
    if s > 0.0 {
        p.iter_mut().for_each(|v| *v /= s);
    }
    for _ in 0..16 {
        let s: f64 = p.iter().sum();
        if s == 1.0 {
            return;
        }
        let k = argmax(p);
        p[k] += 1.0 - s;
    }
    // Absorb the residual in the last slot so the running sum ends at 1.
    let n = p.len();
    let head: f64 = p[..n - 1].iter().sum();
    p[n - 1] = (1.0 - head).max(0.0);
}

fn argmax(p: &[f64]) -> usize {
    let mut k = 0;
    for (i, &v) in p.iter().enumerate() {
        if v > p[k] {
            k = i;
        }
    }
    k
}

struct KdTree {
    pts: Vec<f64>,
    d: usize,
    nodes: Vec<KdNode>,
    root: usize,
}

struct KdNode {
    index: usize,
    axis: usize,
    left: usize,
    right: usize,
}

const NIL: usize = usize::MAX;

impl KdTree {
    fn new(pts: Vec<f64>, d: usize) -> Self {
        let n = if d == 0 { 0 } else { pts.len() / d };
        let mut idx: Vec<usize> = (0..n).collect();
        let mut tree = Self { pts, d, nodes: Vec::with_capacity(n), root: NIL };
        tree.root = tree.build(&mut idx);
        tree
    }

    fn coord(&self, i: usize, a: usize) -> f64 {
        self.pts[i * self.d + a]
    }

    fn build(&mut self, idx: &mut [usize]) -> usize {
        if idx.is_empty() {
            return NIL;
        }
        let mut axis = 0;
        let mut best = -1.0;
        for a in 0..self.d {
            let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
            for &i in idx.iter() {
                let v = self.coord(i, a);
                lo = lo.min(v);
                hi = hi.max(v);
            }
            if hi - lo > best {
                best = hi - lo;
                axis = a;
            }
        }
        idx.sort_by(|&x, &y| {
            self.coord(x, axis).partial_cmp(&self.coord(y, axis)).unwrap_or(Ordering::Equal).then(x.cmp(&y))
        });
        let mid = idx.len() / 2;
        let index = idx[mid];
        let (l, r) = idx.split_at_mut(mid);
        let left = self.build(l);
        let right = self.build(&mut r[1..]);
        self.nodes.push(KdNode { index, axis, left, right });
        self.nodes.len() - 1
    }

    /// Nearest point to `q`; ties go to the lower index.
    fn nearest(&self, q: &[f64]) -> usize {
        let mut best = (f64::INFINITY, usize::MAX);
        self.search(self.root, q, &mut best);
        best.1
    }

    fn search(&self, node: usize, q: &[f64], best: &mut (f64, usize)) {
        if node == NIL {
            return;
        }
        let n = &self.nodes[node];
        let mut dist = 0.0;
        for a in 0..self.d {
            let t = q[a] - self.coord(n.index, a);
            dist += t * t;
        }
        if dist < best.0 || (dist == best.0 && n.index < best.1) {
            *best = (dist, n.index);
        }
        let diff = q[n.axis] - self.coord(n.index, n.axis);
        let (near, far) = if diff < 0.0 { (n.left, n.right) } else { (n.right, n.left) };
        self.search(near, q, best);
        if diff * diff <= best.0 {
            self.search(far, q, best);
        }
    }
}

fn check_distinct(points: &PointMatrix) -> Result<()> {
    let n = points.rows();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| {
        points
            .row(a)
            .iter()
            .zip(points.row(b))
            .map(|(x, y)| x.partial_cmp(y).unwrap_or(Ordering::Equal))
            .find(|o| *o != Ordering::Equal)
            .unwrap_or(Ordering::Equal)
    });
    for w in idx.windows(2) {
        if points.row(w[0]) == points.row(w[1]) {
            return Err(Error::DuplicatePoints { first: w[0].min(w[1]), second: w[0].max(w[1]) });
        }
    }
    Ok(())
}

/// Assigned probabilities of the Voronoi cells of `points`, estimated as the
/// share of a Monte Carlo pool drawn from `space` whose nearest representative
/// (Euclidean distance after dividing each coordinate by its marginal standard
/// deviation) is each point. The pool is processed in fixed-size chunks with
/// their own random streams and merged in chunk order.
pub fn voronoi_assigned_probability<E: Executor>(
    points: &PointMatrix,
    space: &[ScalarDistribution],
    n_pool: usize,
    seed: u64,
    exec: &E,
) -> Result<Vec<f64>> {
    let n = points.rows();
    let d = space.len();
    if points.cols() != d {
        return Err(Error::DimensionMismatch { expected: d, found: points.cols() });
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    check_distinct(points)?;
    if n == 1 {
        return Ok(vec![1.0]);
    }
    let scale: Vec<f64> = space.iter().map(|s| 1.0 / s.std_dev()).collect();
    let mut flat = Vec::with_capacity(n * d);
    for row in points.iter_rows() {
        flat.extend(row.iter().zip(&scale).map(|(v, s)| v * s));
    }
    let tree = KdTree::new(flat, d);
    let chunks = n_pool.div_ceil(POOL_CHUNK);
    let partial = exec.map_indexed(chunks, |c| {
        let mut counts = vec![0u64; n];
        let mut rng = rng::stream(rng::derive_seed(seed, c as u64), 2);
        let len = POOL_CHUNK.min(n_pool - c * POOL_CHUNK);
        let mut q = vec![0.0; d];
        for _ in 0..len {
            for (j, dist) in space.iter().enumerate() {
                q[j] = dist.quantile(rng::open_unit(&mut rng)) * scale[j];
            }
            counts[tree.nearest(&q)] += 1;
        }
        counts
    });
    let mut counts = vec![0u64; n];
    for part in partial {
        for (c, p) in counts.iter_mut().zip(part) {
            *c += p;
        }
    }
    let mut p: Vec<f64> = counts.iter().map(|&c| c as f64 / n_pool as f64).collect();
    renormalize_exact(&mut p);
    Ok(p)
}

/// Moves every coordinate to the marginal quantile of the midpoint of its
/// cumulative assigned probability: in each dimension the k-th smallest
/// coordinate becomes `F⁻¹(C_k + P_k / 2)`, `C_k` being the probability of
/// the points ranked before it. Rank order is preserved.
pub fn gf_rearrange(points: &PointMatrix, probabilities: &[f64], marginals: &[ScalarDistribution]) -> PointMatrix {
    let n = points.rows();
    let mut out = points.clone();
    for (j, m) in marginals.iter().enumerate() {
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| {
            points.get(a, j).partial_cmp(&points.get(b, j)).unwrap_or(Ordering::Equal).then(a.cmp(&b))
        });
        let mut cum = 0.0;
        for &i in &order {
            let p = probabilities[i];
            out.set(i, j, m.quantile((cum + 0.5 * p).clamp(0.0, 1.0)));
            cum += p;
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelectionSettings {
    pub strategy: Strategy,
    pub assignment: Assignment,
    /// Pool size for the Voronoi probabilities; `None` uses the default.
    pub pool_size: Option<usize>,
}

impl Default for SelectionSettings {
    fn default() -> Self {
        Self { strategy: Strategy::LowDiscrepancy, assignment: Assignment::Voronoi, pool_size: None }
    }
}

/// Full point-selection step: design, Voronoi weighting, rearrangement and
/// one re-weighting pass (or equal weights).
pub fn select_points<E: Executor>(
    space: &[ScalarDistribution],
    n_sel: usize,
    settings: &SelectionSettings,
    seed: u64,
    exec: &E,
) -> Result<RepresentativePointSet> {
    let points = generate_points(space, n_sel, settings.strategy, seed)?;
    let pool_size = settings.pool_size.unwrap_or_else(|| default_pool_size(n_sel));
    let meta = PointSetMeta { strategy: settings.strategy, assignment: settings.assignment, seed, pool_size };
    match settings.assignment {
        Assignment::Equal => {
            let mut probabilities = vec![1.0 / n_sel as f64; n_sel];
            renormalize_exact(&mut probabilities);
            Ok(RepresentativePointSet { points, probabilities, meta })
        }
        Assignment::Voronoi => {
            let p0 = voronoi_assigned_probability(&points, space, pool_size, rng::derive_seed(seed, 11), exec)?;
            let (points, p0) = drop_empty(&points, &p0);
            let moved = gf_rearrange(&points, &p0, space);
            let p1 = voronoi_assigned_probability(&moved, space, pool_size, rng::derive_seed(seed, 12), exec)?;
            let (points, probabilities) = drop_empty(&moved, &p1);
            Ok(RepresentativePointSet { points, probabilities, meta })
        }
    }
}

fn drop_empty(points: &PointMatrix, p: &[f64]) -> (PointMatrix, Vec<f64>) {
    if p.iter().all(|&v| v > 0.0) {
        return (points.clone(), p.to_vec());
    }
    let keep: Vec<usize> = (0..p.len()).filter(|&i| p[i] > 0.0).collect();
    let rows: Vec<Vec<f64>> = keep.iter().map(|&i| points.row(i).to_vec()).collect();
    let mut probs: Vec<f64> = keep.iter().map(|&i| p[i]).collect();
    renormalize_exact(&mut probs);
    (PointMatrix::from_rows(&rows), probs)
}
