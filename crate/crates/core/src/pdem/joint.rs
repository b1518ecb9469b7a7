//! Lazy joint density assembled from a slice bundle.

use alloc::vec;
use alloc::vec::Vec;

use super::bundle::SubPDFBundle;
use crate::error::{Error, Result};

/// Joint density `p_Z(z) = Σ_q P^(q) Π_i [slice_{q,i}(z_i) / P^(q)]`,
/// the per-point product `(1/P^{m-1}) Π slices` summed over points.
#[derive(Debug, Clone, Copy)]
pub struct JointPDFView<'a> {
    pub bundle: &'a SubPDFBundle,
}

pub const MAX_DENSE_DIMS: usize = 3;

pub fn assemble_joint(bundle: &SubPDFBundle) -> JointPDFView<'_> {
    JointPDFView { bundle }
}

impl<'a> JointPDFView<'a> {
    pub fn dims(&self) -> usize {
        self.bundle.dims()
    }

    pub fn eval(&self, z: &[f64]) -> Result<f64> {
        let b = self.bundle;
        if z.len() != b.dims() {
            return Err(Error::DimensionMismatch { expected: b.dims(), found: z.len() });
        }
        let mut total = 0.0;
        for q in 0..b.len() {
            let mut term = b.probabilities[q];
            for (i, &zi) in z.iter().enumerate() {
                term *= b.unit_density(q, i, zi);
            }
            total += term;
        }
        Ok(total)
    }

    /// Joint density on the tensor grid, last dimension fastest. Only for
    /// up to three dimensions.
    pub fn dense(&self) -> Result<Vec<f64>> {
        let b = self.bundle;
        let m = b.dims();
        if m > MAX_DENSE_DIMS {
            return Err(Error::DenseTooLarge(m));
        }
        let shape: Vec<usize> = b.grids.iter().map(|g| g.nodes).collect();
        let size: usize = shape.iter().product();
        let mut out = vec![0.0; size];
        let mut unit: Vec<Vec<f64>> = shape.iter().map(|&n| vec![0.0; n]).collect();
        for q in 0..b.len() {
            let p = b.probabilities[q];
            for (i, u) in unit.iter_mut().enumerate() {
                for (dst, v) in u.iter_mut().zip(b.slice(q, i)) {
                    *dst = v / p;
                }
            }
            for (flat, dst) in out.iter_mut().enumerate() {
                let mut rem = flat;
                let mut term = p;
                for i in (0..m).rev() {
                    term *= unit[i][rem % shape[i]];
                    rem /= shape[i];
                }
                *dst += term;
            }
        }
        Ok(out)
    }

    /// Tensor-trapezoidal mass of the dense joint density.
    pub fn total_mass(&self) -> Result<f64> {
        let b = self.bundle;
        let dense = self.dense()?;
        let shape: Vec<usize> = b.grids.iter().map(|g| g.nodes).collect();
        let mut acc = 0.0;
        for (flat, v) in dense.iter().enumerate() {
            let mut rem = flat;
            let mut w = 1.0;
            for i in (0..shape.len()).rev() {
                let k = rem % shape[i];
                rem /= shape[i];
                let edge = if k == 0 || k + 1 == shape[i] { 0.5 } else { 1.0 };
                w *= edge * b.grids[i].step();
            }
            acc += w * v;
        }
        Ok(acc)
    }

    /// Marginal density of dimension `i`: the other kernels integrate to one,
    /// so it is the plain sum of slices.
    pub fn marginal(&self, i: usize) -> Result<Vec<f64>> {
        let b = self.bundle;
        if i >= b.dims() {
            return Err(Error::DimensionMismatch { expected: b.dims(), found: i });
        }
        let mut out = vec![0.0; b.grids[i].nodes];
        for q in 0..b.len() {
            for (dst, v) in out.iter_mut().zip(b.slice(q, i)) {
                *dst += v;
            }
        }
        Ok(out)
    }
}
