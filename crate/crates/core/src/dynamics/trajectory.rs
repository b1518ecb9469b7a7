use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Time-gridded response of one deterministic run. All channels share the
/// uniform grid `t_k = k · dt`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub dt: f64,
    pub channels: Vec<(String, Vec<f64>)>,
}

impl Trajectory {
    pub fn new(dt: f64, channels: Vec<(String, Vec<f64>)>) -> Self {
        Self { dt, channels }
    }

    pub fn len(&self) -> usize {
        self.channels.first().map_or(0, |c| c.1.len())
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn duration(&self) -> f64 {
        self.len().saturating_sub(1) as f64 * self.dt
    }

    pub fn channel(&self, name: &str) -> Option<&[f64]> {
        self.channels.iter().find(|c| c.0 == name).map(|c| c.1.as_slice())
    }

    pub fn last(&self, name: &str) -> Option<f64> {
        self.channel(name).and_then(|c| c.last().copied())
    }
}

/// Peak absolute value of a channel over the whole grid.
pub fn response_max(traj: &Trajectory, channel: &str) -> Result<f64> {
    let c =
        traj.channel(channel).ok_or_else(|| Error::SchemaMismatch(format!("trajectory has no channel `{channel}`")))?;
    Ok(c.iter().fold(0.0f64, |m, v| m.max(v.abs())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;
    use alloc::vec;

    #[test]
    fn peak_of_zero_sine_and_negation() {
        let z = Trajectory::new(0.1, vec![("x".to_string(), vec![0.0; 11])]);
        assert_eq!(response_max(&z, "x").unwrap(), 0.0);
        let s: Vec<f64> = (0..=2000).map(|k| libm::sin(k as f64 * 0.005)).collect();
        let neg: Vec<f64> = s.iter().map(|v| -v).collect();
        let t = Trajectory::new(0.005, vec![("x".to_string(), s), ("y".to_string(), neg)]);
        let m = response_max(&t, "x").unwrap();
        assert!((m - 1.0).abs() < 1e-4);
        assert_eq!(m, response_max(&t, "y").unwrap());
        assert!(response_max(&t, "missing").is_err());
    }
}
