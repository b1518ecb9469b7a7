//! Decoupled density evolution: per-point one-dimensional solutions, their
//! product assembly and conditional-density extraction.

pub mod bundle;
pub mod conditional;
pub mod grid;
pub mod joint;

use alloc::string::String;
use alloc::vec::Vec;

pub use bundle::{kernel, solve_lichen_1d, weighted_std, Bandwidth, DimSettings, SliceKind, SubPDFBundle};
pub use conditional::{conditional_pdf, ConditionalDensity, MIN_EFFECTIVE_POINTS};
pub use grid::Grid1D;
pub use joint::{assemble_joint, JointPDFView};

/// Pseudo process `Θ̃(t) = (t / T̄) θ`, equal to `θ` at the output time.
pub fn pseudo_process_value(theta: f64, t: f64, output_time: f64) -> f64 {
    t / output_time * theta
}

/// Response vector augmented with one pseudo-process channel per epistemic
/// coordinate.
#[derive(Debug, Clone, PartialEq)]
pub struct AugmentedResponseSpec {
    pub qoi: String,
    pub epistemic: Vec<String>,
    pub output_time: f64,
}

impl AugmentedResponseSpec {
    /// `[qoi, Θ̃_1(T̄), …]` for one representative point.
    pub fn row(&self, qoi_value: f64, theta: &[f64]) -> Vec<f64> {
        let mut r = Vec::with_capacity(1 + theta.len());
        r.push(qoi_value);
        r.extend(theta.iter().map(|&t| pseudo_process_value(t, self.output_time, self.output_time)));
        r
    }
}
