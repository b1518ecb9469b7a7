//! Conditional density of a response given epistemic coordinates, as the
//! ratio of the joint density to the smoothed pseudo marginal.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use super::grid::Grid1D;
use super::joint::JointPDFView;
use crate::error::{Error, Result};
use crate::uncertainty::{PseudoCoord, PseudoDensity};

pub const MIN_MARGINAL: f64 = 1e-12;
/// Smallest Kish effective number of points behind a conditional estimate.
pub const MIN_EFFECTIVE_POINTS: f64 = 8.0;

#[derive(Debug, Clone, PartialEq)]
pub struct ConditionalDensity {
    pub grid: Grid1D,
    pub pdf: Vec<f64>,
    pub cdf: Vec<f64>,
    /// `|∫ joint/marginal dx − 1|` before renormalization.
    pub residual: f64,
    /// Smoothed pseudo marginal at the conditioning point.
    pub marginal: f64,
    /// Kish effective number of points, `(Σw)² / Σw²`.
    pub effective_points: f64,
}

/// Conditional density of dimension `x_dim` given bundle dimensions
/// `theta_dims` fixed at `theta_star`. `pseudo` holds one coordinate per
/// conditioning dimension.
pub fn conditional_pdf(
    view: &JointPDFView<'_>,
    x_dim: usize,
    theta_dims: &[usize],
    theta_star: &[f64],
    pseudo: &PseudoDensity,
) -> Result<ConditionalDensity> {
    let b = view.bundle;
    if theta_dims.len() != theta_star.len() || pseudo.coords.len() != theta_dims.len() {
        return Err(Error::DimensionMismatch { expected: theta_dims.len(), found: theta_star.len() });
    }
    if x_dim >= b.dims() || theta_dims.iter().any(|&d| d >= b.dims() || d == x_dim) {
        return Err(Error::DimensionMismatch { expected: b.dims(), found: x_dim });
    }
    for ((&d, &t), c) in theta_dims.iter().zip(theta_star).zip(&pseudo.coords) {
        if let PseudoCoord::Uniform { lower, upper } = *c {
            let margin = 2.0 * b.bandwidths[d];
            let slack = 1e-9 * (upper - lower);
            if t < lower + margin - slack || t > upper - margin + slack {
                return Err(Error::OutsideSupport(format!(
                    "{t} is within two bandwidths ({margin:e}) of the pseudo support [{lower}, {upper}]"
                )));
            }
        }
    }
    let weights: Vec<f64> = (0..b.len())
        .map(|q| {
            let mut w = b.probabilities[q];
            for (&d, &t) in theta_dims.iter().zip(theta_star) {
                w *= b.unit_density(q, d, t);
            }
            w
        })
        .collect();
    let marginal: f64 = weights.iter().sum();
    if !(marginal >= MIN_MARGINAL) {
        return Err(Error::ZeroMarginal { value: marginal });
    }
    let sum_sq: f64 = weights.iter().map(|w| w * w).sum();
    let effective_points = marginal * marginal / sum_sq;
    let w_max = weights.iter().copied().fold(0.0, f64::max);
    let cut = 1e-17 * w_max;
    let grid = b.grids[x_dim];
    let mut pdf = vec![0.0; grid.nodes];
    for (q, &w) in weights.iter().enumerate() {
        if w <= cut {
            continue;
        }
        let scale = w / (marginal * b.probabilities[q]);
        for (dst, v) in pdf.iter_mut().zip(b.slice(q, x_dim)) {
            *dst += scale * v;
        }
    }
    let mass = grid.trapezoid(&pdf);
    let residual = (mass - 1.0).abs();
    for v in pdf.iter_mut() {
        *v /= mass;
    }
    let mut cdf = grid.cumulative(&pdf);
    let last = *cdf.last().unwrap();
    for v in cdf.iter_mut() {
        *v = (*v / last).min(1.0);
    }
    Ok(ConditionalDensity { grid, pdf, cdf, residual, marginal, effective_points })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exec::Sequential;
    use crate::linalg::PointMatrix;
    use crate::pdem::bundle::{Bandwidth, DimSettings, SubPDFBundle};
    use crate::pdem::joint::assemble_joint;
    use crate::points::{unit_design, Strategy};

    fn pseudo(lo: f64, hi: f64) -> PseudoDensity {
        PseudoDensity { coords: vec![PseudoCoord::Uniform { lower: lo, upper: hi }] }
    }

    fn pairs(n: usize, f: impl Fn(f64, f64) -> f64) -> (PointMatrix, Vec<f64>) {
        let u = unit_design(n, 2, Strategy::LowDiscrepancy, 3).unwrap();
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|q| {
                let theta = u.get(q, 0);
                vec![f(theta, u.get(q, 1)), theta]
            })
            .collect();
        (PointMatrix::from_rows(&rows), vec![1.0 / n as f64; n])
    }

    #[test]
    fn identity_map_concentrates_at_conditioning_value() {
        let (v, p) = pairs(400, |t, _| t);
        let dims = [DimSettings::default().with_nodes(512), DimSettings::default().with_nodes(256)];
        let b = SubPDFBundle::build(&v, &p, &dims, &Sequential).unwrap();
        let j = assemble_joint(&b);
        let c = conditional_pdf(&j, 0, &[1], &[0.5], &pseudo(0.0, 1.0)).unwrap();
        let mean = c.grid.trapezoid(&c.grid.points().iter().zip(&c.pdf).map(|(x, f)| x * f).collect::<Vec<_>>());
        assert!((mean - 0.5).abs() < 2.0 * b.bandwidths[0].max(b.bandwidths[1]));
        assert!((c.grid.trapezoid(&c.pdf) - 1.0).abs() < 1e-12);
        assert!((c.cdf.last().unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn independent_response_recovers_marginal() {
        let (v, p) = pairs(200, |_, u| crate::special::std_normal_quantile(u));
        let dims = [DimSettings::default().with_nodes(256).with_bandwidth(Bandwidth::Rule { scale: 1.5 }); 2];
        let b = SubPDFBundle::build(&v, &p, &dims, &Sequential).unwrap();
        let j = assemble_joint(&b);
        let marginal = j.marginal(0).unwrap();
        let c = conditional_pdf(&j, 0, &[1], &[0.45], &pseudo(0.0, 1.0)).unwrap();
        let peak = marginal.iter().copied().fold(0.0, f64::max);
        let sup = c.pdf.iter().zip(&marginal).map(|(a, m)| (a - m).abs()).fold(0.0, f64::max);
        assert!(sup <= 0.05 * peak, "{sup} vs peak {peak}");
    }

    #[test]
    fn invariant_under_common_probability_scaling() {
        let (v, p) = pairs(100, |t, u| t + u);
        let dims = [DimSettings::default().with_nodes(128).with_bandwidth(Bandwidth::Fixed(0.08)); 2];
        let b1 = SubPDFBundle::build(&v, &p, &dims, &Sequential).unwrap();
        let scaled: Vec<f64> = p.iter().map(|x| 3.7 * x).collect();
        let b2 = SubPDFBundle::build(&v, &scaled, &dims, &Sequential).unwrap();
        let c1 = conditional_pdf(&assemble_joint(&b1), 0, &[1], &[0.5], &pseudo(0.0, 1.0)).unwrap();
        let c2 = conditional_pdf(&assemble_joint(&b2), 0, &[1], &[0.5], &pseudo(0.0, 1.0)).unwrap();
        for (a, c) in c1.pdf.iter().zip(&c2.pdf) {
            assert!((a - c).abs() <= 1e-12 * a.abs().max(1e-12));
        }
    }

    #[test]
    fn support_edges_and_empty_marginal() {
        let (v, p) = pairs(100, |t, _| t);
        let dims = [DimSettings::default().with_nodes(128).with_bandwidth(Bandwidth::Fixed(0.01)); 2];
        let b = SubPDFBundle::build(&v, &p, &dims, &Sequential).unwrap();
        let j = assemble_joint(&b);
        assert!(matches!(conditional_pdf(&j, 0, &[1], &[0.001], &pseudo(0.0, 1.0)), Err(Error::OutsideSupport(_))));
        assert!(matches!(conditional_pdf(&j, 0, &[1], &[5.0], &pseudo(0.0, 10.0)), Err(Error::ZeroMarginal { .. })));
    }
}
