use alloc::vec::Vec;

use crate::error::{invalid, Result};

pub const MIN_NODES: usize = 16;

/// Uniform grid of `nodes` points from `lower` to `upper` inclusive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid1D {
    pub lower: f64,
    pub upper: f64,
    pub nodes: usize,
}

impl Grid1D {
    pub fn new(lower: f64, upper: f64, nodes: usize) -> Result<Self> {
        if nodes < MIN_NODES {
            return Err(invalid("nodes", alloc::format!("grid needs at least {MIN_NODES} nodes, got {nodes}")));
        }
        if !(lower.is_finite() && upper.is_finite() && upper > lower) {
            return Err(invalid("grid", alloc::format!("bad extent [{lower}, {upper}]")));
        }
        Ok(Self { lower, upper, nodes })
    }

    pub fn step(&self) -> f64 {
        (self.upper - self.lower) / (self.nodes - 1) as f64
    }

    pub fn node(&self, k: usize) -> f64 {
        if k + 1 == self.nodes {
            self.upper
        } else {
            self.lower + k as f64 * self.step()
        }
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.nodes).map(|k| self.node(k)).collect()
    }

    pub fn center(&self) -> f64 {
        0.5 * (self.lower + self.upper)
    }

    pub fn half_width(&self) -> f64 {
        0.5 * (self.upper - self.lower)
    }

    pub fn contains(&self, z: f64) -> bool {
        (self.lower..=self.upper).contains(&z)
    }

    /// Trapezoidal integral of node values.
    pub fn trapezoid(&self, values: &[f64]) -> f64 {
        debug_assert_eq!(values.len(), self.nodes);
        let inner: f64 = values[1..self.nodes - 1].iter().sum();
        self.step() * (inner + 0.5 * (values[0] + values[self.nodes - 1]))
    }

    /// Running trapezoidal integral, starting at 0 on the first node.
    pub fn cumulative(&self, values: &[f64]) -> Vec<f64> {
        let h = self.step();
        let mut out = Vec::with_capacity(values.len());
        let mut acc = 0.0;
        out.push(0.0);
        for w in values.windows(2) {
            acc += 0.5 * h * (w[0] + w[1]);
            out.push(acc);
        }
        out
    }

    /// Linear interpolation of node values, zero outside the grid.
    pub fn interpolate(&self, values: &[f64], z: f64) -> f64 {
        if !self.contains(z) {
            return 0.0;
        }
        let s = (z - self.lower) / self.step();
        let k = (libm::floor(s) as usize).min(self.nodes - 2);
        let w = s - k as f64;
        values[k] + w * (values[k + 1] - values[k])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn construction_rules() {
        assert!(Grid1D::new(0.0, 1.0, 15).is_err());
        assert!(Grid1D::new(1.0, 1.0, 32).is_err());
        let g = Grid1D::new(-1.0, 1.0, 21).unwrap();
        assert_eq!(g.node(0), -1.0);
        assert_eq!(g.node(20), 1.0);
        assert!((g.step() - 0.1).abs() < 1e-15);
    }

    #[test]
    fn trapezoid_and_cumulative_agree() {
        let g = Grid1D::new(0.0, 2.0, 101).unwrap();
        let v: Vec<f64> = g.points().iter().map(|x| x * x).collect();
        let c = g.cumulative(&v);
        assert!((c[100] - g.trapezoid(&v)).abs() < 1e-14);
        assert!((g.trapezoid(&v) - 8.0 / 3.0).abs() < 1e-3);
        assert!((g.interpolate(&v, 1.0) - 1.0).abs() < 1e-12);
        assert_eq!(g.interpolate(&v, 2.5), 0.0);
    }
}
