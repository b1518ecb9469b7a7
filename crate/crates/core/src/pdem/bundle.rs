//! Per-point one-dimensional density slices.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use super::grid::Grid1D;
use crate::error::{invalid, Error, Result};
use crate::exec::Executor;
use crate::linalg::PointMatrix;
use crate::special::std_normal_pdf;

/// Kernel width rule for one response dimension.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Bandwidth {
    /// `scale · σ̂ · n^{-1/5}` with σ̂ the probability-weighted spread of the
    /// point values, floored at two grid steps.
    Rule {
        scale: f64,
    },
    Fixed(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DimSettings {
    pub nodes: usize,
    pub bandwidth: Bandwidth,
    /// Explicit grid extent; by default the point values padded by five
    /// bandwidths on each side.
    pub extent: Option<(f64, f64)>,
}

impl Default for DimSettings {
    fn default() -> Self {
        Self { nodes: 256, bandwidth: Bandwidth::Rule { scale: 1.0 }, extent: None }
    }
}

impl DimSettings {
    pub fn with_nodes(mut self, nodes: usize) -> Self {
        self.nodes = nodes;
        self
    }

    pub fn with_bandwidth(mut self, b: Bandwidth) -> Self {
        self.bandwidth = b;
        self
    }

    pub fn with_extent(mut self, lower: f64, upper: f64) -> Self {
        self.extent = Some((lower, upper));
        self
    }
}

/// Unit-mass Gaussian kernel of width `b`.
pub fn kernel(u: f64, b: f64) -> f64 {
    std_normal_pdf(u / b) / b
}

/// Probability-weighted standard deviation.
pub fn weighted_std(values: &[f64], weights: &[f64]) -> f64 {
    let total: f64 = weights.iter().sum();
    let mean = values.iter().zip(weights).map(|(v, w)| v * w).sum::<f64>() / total;
    let var = values.iter().zip(weights).map(|(v, w)| w * (v - mean) * (v - mean)).sum::<f64>() / total;
    libm::sqrt(var.max(0.0))
}

/// Kernel-regularized solution of the one-dimensional transport equation
/// at the output time: the point mass `P` carried along its characteristic
/// to `value`, sampled on `grid`.
pub fn solve_lichen_1d(value: f64, p: f64, grid: &Grid1D, b: f64) -> Result<Vec<f64>> {
    if !value.is_finite() {
        return Err(Error::NonFiniteState { time: f64::NAN });
    }
    if !(b > 0.0) {
        return Err(invalid("bandwidth", "must be positive"));
    }
    if (value - grid.center()).abs() > grid.half_width() - 4.0 * b {
        return Err(Error::OffGrid { value, lower: grid.lower, upper: grid.upper });
    }
    Ok((0..grid.nodes).map(|k| p * kernel(grid.node(k) - value, b)).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SliceKind {
    /// Gaussian kernel centred on the point's response value.
    Kernel,
    /// Node values supplied directly (injected analytic density).
    Tabulated,
}

/// Sub-densities `p^(q)_{Z_i}` for every point `q` and response dimension
/// `i`, stored as `n_sel · Σ n_i` node values.
#[derive(Debug, Clone, PartialEq)]
pub struct SubPDFBundle {
    pub grids: Vec<Grid1D>,
    pub bandwidths: Vec<f64>,
    pub probabilities: Vec<f64>,
    /// Response value of each point in each dimension (kernel centres).
    pub centers: PointMatrix,
    values: Vec<f64>,
    kinds: Vec<SliceKind>,
    offsets: Vec<usize>,
}

fn plan_dimension(column: &[f64], probs: &[f64], s: &DimSettings) -> Result<(Grid1D, f64)> {
    let lo = column.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = column.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(lo.is_finite() && hi.is_finite()) {
        return Err(Error::NonFiniteState { time: f64::NAN });
    }
    let n = column.len() as f64;
    let floor_factor = 2.0 / (s.nodes as f64 - 1.0);
    match (s.bandwidth, s.extent) {
        (Bandwidth::Fixed(b), Some((a, c))) => Ok((Grid1D::new(a, c, s.nodes)?, b)),
        (Bandwidth::Fixed(b), None) => Ok((Grid1D::new(lo - 5.0 * b, hi + 5.0 * b, s.nodes)?, b)),
        (Bandwidth::Rule { scale }, Some((a, c))) => {
            let g = Grid1D::new(a, c, s.nodes)?;
            let mut b = scale * weighted_std(column, probs) * libm::pow(n, -0.2);
            b = b.max(2.0 * g.step());
            Ok((g, b))
        }
        (Bandwidth::Rule { scale }, None) => {
            if s.nodes <= 21 {
                return Err(invalid("nodes", "automatic grids need more than 21 nodes"));
            }
            let spread = hi - lo;
            let mut b = scale * weighted_std(column, probs) * libm::pow(n, -0.2);
            if spread == 0.0 {
                b = if b > 0.0 { b } else { 1e-6 * lo.abs().max(1.0) };
            } else if b < floor_factor * (spread + 10.0 * b) {
                // solve b = 2·step with step = (spread + 10 b)/(nodes − 1)
                b = 2.0 * spread / (s.nodes as f64 - 21.0);
            }
            Ok((Grid1D::new(lo - 5.0 * b, hi + 5.0 * b, s.nodes)?, b))
        }
    }
}

impl SubPDFBundle {
    /// Builds kernel slices for `values` (one row per point, one column per
    /// response dimension) with assigned probabilities `probs`.
    pub fn build<E: Executor>(values: &PointMatrix, probs: &[f64], dims: &[DimSettings], exec: &E) -> Result<Self> {
        let (n_sel, m) = (values.rows(), values.cols());
        if probs.len() != n_sel {
            return Err(Error::DimensionMismatch { expected: n_sel, found: probs.len() });
        }
        if dims.len() != m {
            return Err(Error::DimensionMismatch { expected: m, found: dims.len() });
        }
        if n_sel == 0 {
            return Err(invalid("values", "bundle needs at least one point"));
        }
        let mut grids = Vec::with_capacity(m);
        let mut bandwidths = Vec::with_capacity(m);
        for (i, s) in dims.iter().enumerate() {
            let (g, b) = plan_dimension(&values.column(i), probs, s)?;
            log::debug!("dimension {i}: grid [{:.6e}, {:.6e}] x {}, bandwidth {:.6e}", g.lower, g.upper, g.nodes, b);
            grids.push(g);
            bandwidths.push(b);
        }
        let mut offsets = vec![0];
        for g in &grids {
            offsets.push(offsets.last().unwrap() + g.nodes);
        }
        let stride = *offsets.last().unwrap();
        let rows = exec.map_indexed(n_sel, |q| -> Result<Vec<f64>> {
            let mut row = Vec::with_capacity(stride);
            for i in 0..m {
                row.extend(solve_lichen_1d(values.get(q, i), probs[q], &grids[i], bandwidths[i])?);
            }
            Ok(row)
        });
        let mut flat = Vec::with_capacity(n_sel * stride);
        for r in rows {
            flat.extend(r?);
        }
        Ok(Self {
            grids,
            bandwidths,
            probabilities: probs.to_vec(),
            centers: values.clone(),
            values: flat,
            kinds: vec![SliceKind::Kernel; n_sel * m],
            offsets,
        })
    }

    /// Reassembles a bundle from stored parts (deserialization).
    pub fn from_parts(
        grids: Vec<Grid1D>,
        bandwidths: Vec<f64>,
        probabilities: Vec<f64>,
        centers: PointMatrix,
        slices: Vec<Vec<Vec<f64>>>,
        kinds: Vec<SliceKind>,
    ) -> Result<Self> {
        let (n_sel, m) = (probabilities.len(), grids.len());
        if bandwidths.len() != m || centers.rows() != n_sel || centers.cols() != m || slices.len() != n_sel {
            return Err(Error::SchemaMismatch(format!("bundle parts disagree on {n_sel} points x {m} dimensions")));
        }
        if kinds.len() != n_sel * m {
            return Err(Error::DimensionMismatch { expected: n_sel * m, found: kinds.len() });
        }
        let mut offsets = vec![0];
        for g in &grids {
            offsets.push(offsets.last().unwrap() + g.nodes);
        }
        let mut values = Vec::with_capacity(n_sel * offsets[m]);
        for per_point in slices {
            if per_point.len() != m {
                return Err(Error::DimensionMismatch { expected: m, found: per_point.len() });
            }
            for (i, s) in per_point.into_iter().enumerate() {
                if s.len() != grids[i].nodes {
                    return Err(Error::DimensionMismatch { expected: grids[i].nodes, found: s.len() });
                }
                values.extend(s);
            }
        }
        Ok(Self { grids, bandwidths, probabilities, centers, values, kinds, offsets })
    }

    pub fn len(&self) -> usize {
        self.probabilities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probabilities.is_empty()
    }

    pub fn dims(&self) -> usize {
        self.grids.len()
    }

    /// Number of stored node values, `n_sel · Σ n_i`.
    pub fn storage_len(&self) -> usize {
        self.values.len()
    }

    fn stride(&self) -> usize {
        self.offsets[self.dims()]
    }

    pub fn slice(&self, q: usize, i: usize) -> &[f64] {
        let base = q * self.stride();
        &self.values[base + self.offsets[i]..base + self.offsets[i + 1]]
    }

    pub fn kind(&self, q: usize, i: usize) -> SliceKind {
        self.kinds[q * self.dims() + i]
    }

    /// `slice_{q,i}(z) / P^(q)`: the slice as a unit-mass density.
    pub fn unit_density(&self, q: usize, i: usize, z: f64) -> f64 {
        match self.kind(q, i) {
            SliceKind::Kernel => kernel(z - self.centers.get(q, i), self.bandwidths[i]),
            SliceKind::Tabulated => self.grids[i].interpolate(self.slice(q, i), z) / self.probabilities[q],
        }
    }

    /// Largest deviation of a trapezoidal slice mass from `P^(q)`.
    pub fn max_mass_error(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for q in 0..self.len() {
            for i in 0..self.dims() {
                worst = worst.max((self.grids[i].trapezoid(self.slice(q, i)) - self.probabilities[q]).abs());
            }
        }
        worst
    }

    /// Replaces slice `(q, i)` by `P^(q)` times an analytic density sampled
    /// on grid `i`.
    pub fn inject_analytic_conditional<F: Fn(f64) -> f64>(&mut self, q: usize, i: usize, density: F) -> Result<()> {
        if q >= self.len() || i >= self.dims() {
            return Err(Error::DimensionMismatch { expected: self.len() * self.dims(), found: q * self.dims() + i });
        }
        let g = self.grids[i];
        let sampled: Vec<f64> = (0..g.nodes).map(|k| density(g.node(k))).collect();
        if let Some(v) = sampled.iter().find(|v| !(**v >= 0.0)) {
            return Err(Error::BadDensity(format!("density value {v} is negative or not finite")));
        }
        let mass = g.trapezoid(&sampled);
        if (mass - 1.0).abs() > 1e-6 {
            return Err(Error::BadDensity(format!("density integrates to {mass} on the grid")));
        }
        let p = self.probabilities[q];
        let base = q * self.stride() + self.offsets[i];
        for (dst, v) in self.values[base..base + g.nodes].iter_mut().zip(sampled) {
            *dst = p * v;
        }
        let m = self.dims();
        self.kinds[q * m + i] = SliceKind::Tabulated;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exec::Sequential;
    use crate::special::std_normal_cdf;
    use proptest::prelude::{prop_assert, proptest};

    #[test]
    fn centred_slice_is_symmetric_with_unit_mass() {
        let g = Grid1D::new(-5.0, 5.0, 201).unwrap();
        let s = solve_lichen_1d(0.0, 1.0, &g, 0.5).unwrap();
        for k in 0..201 {
            assert!((s[k] - s[200 - k]).abs() < 1e-15);
        }
        let peak = (0..201).max_by(|&a, &b| s[a].total_cmp(&s[b])).unwrap();
        assert_eq!(peak, 100);
        assert!((g.trapezoid(&s) - 1.0).abs() < 1e-6);
    }

    #[test]
    fn slice_mass_equals_probability() {
        let g = Grid1D::new(-5.0, 5.0, 201).unwrap();
        let s = solve_lichen_1d(0.3, 0.37, &g, 0.4).unwrap();
        assert!((g.trapezoid(&s) - 0.37).abs() < 1e-6);
    }

    #[test]
    fn aligned_shift_translates_by_one_node() {
        let g = Grid1D::new(-4.0, 4.0, 161).unwrap();
        let a = solve_lichen_1d(0.25, 1.0, &g, 0.3).unwrap();
        let b = solve_lichen_1d(0.25 + g.step(), 1.0, &g, 0.3).unwrap();
        // direct construction: b[k] is the kernel at node k - 1 relative to a
        for k in 1..161 {
            assert!((b[k] - a[k - 1]).abs() < 1e-12, "{k}");
        }
    }

    #[test]
    fn off_grid_is_rejected() {
        let g = Grid1D::new(-1.0, 1.0, 64).unwrap();
        assert!(matches!(solve_lichen_1d(0.9, 1.0, &g, 0.1), Err(Error::OffGrid { .. })));
    }

    #[test]
    fn storage_is_sum_not_product() {
        let n_sel = 200;
        let rows: Vec<Vec<f64>> = (0..n_sel).map(|q| vec![q as f64, (q * 7 % 13) as f64, (q % 5) as f64]).collect();
        let values = PointMatrix::from_rows(&rows);
        let p = vec![1.0 / n_sel as f64; n_sel];
        let dims = [DimSettings::default().with_nodes(64); 3];
        let b = SubPDFBundle::build(&values, &p, &dims, &Sequential).unwrap();
        assert_eq!(b.storage_len(), 38_400);
        assert_eq!(64usize.pow(3), 262_144);
    }

    #[test]
    fn injection() {
        let values = PointMatrix::from_rows(&[vec![0.0], vec![0.5]]);
        let dims =
            [DimSettings::default().with_nodes(1024).with_extent(-20.0, 20.0).with_bandwidth(Bandwidth::Fixed(0.2))];
        let mut b = SubPDFBundle::build(&values, &[0.4, 0.6], &dims, &Sequential).unwrap();
        let kernel_slice = b.slice(1, 0).to_vec();
        b.inject_analytic_conditional(1, 0, |z| kernel(z - 0.5, 0.2)).unwrap();
        assert_eq!(b.slice(1, 0), &kernel_slice[..]);

        let y1 = 3.926_990_816_987_241;
        b.inject_analytic_conditional(0, 0, |z| kernel(z, libm::sqrt(y1))).unwrap();
        let g = b.grids[0];
        let second: Vec<f64> = (0..g.nodes).map(|k| g.node(k) * g.node(k) * b.slice(0, 0)[k] / 0.4).collect();
        assert!((g.trapezoid(&second) - y1).abs() / y1 < 5e-3);
        assert_eq!(b.kind(0, 0), SliceKind::Tabulated);

        let bad = b.inject_analytic_conditional(0, 0, |z| 0.9 * kernel(z, 1.0));
        assert!(matches!(bad, Err(Error::BadDensity(_))));
    }

    #[test]
    fn automatic_grid_keeps_kernels_inside() {
        let rows: Vec<Vec<f64>> = (0..100).map(|q| vec![libm::sin(q as f64)]).collect();
        let values = PointMatrix::from_rows(&rows);
        let p = vec![0.01; 100];
        let b = SubPDFBundle::build(&values, &p, &[DimSettings::default()], &Sequential).unwrap();
        assert!(b.max_mass_error() < 1e-6);
        assert!(b.bandwidths[0] >= 2.0 * b.grids[0].step() * (1.0 - 1e-12));
        // leakage past the grid edge is below Φ(-5)
        assert!(std_normal_cdf(-5.0) < 1e-6);
    }

    proptest! {
        #[test]
        fn slices_are_nonnegative_and_mass_conserving(v in -3.0f64..3.0, p in 0.001f64..1.0, b in 0.05f64..0.5) {
            let g = Grid1D::new(-6.0, 6.0, 512).unwrap();
            let s = solve_lichen_1d(v, p, &g, b).unwrap();
            prop_assert!(s.iter().all(|&x| x >= 0.0));
            prop_assert!((g.trapezoid(&s) - p).abs() < 1e-6 * p.max(1.0));
        }
    }
}
