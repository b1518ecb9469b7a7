//! Black-box response models addressed by named inputs and outputs.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Declared input names (with units) and output names of a model.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModelSchema {
    pub inputs: Vec<(String, String)>,
    pub outputs: Vec<String>,
}

impl ModelSchema {
    pub fn input_names(&self) -> impl Iterator<Item = &str> {
        self.inputs.iter().map(|(n, _)| n.as_str())
    }
}

/// Named parameter values, in any order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ParameterRow {
    pub entries: Vec<(String, f64)>,
}

impl ParameterRow {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, name: &str, value: f64) -> Self {
        self.set(name, value);
        self
    }

    pub fn set(&mut self, name: &str, value: f64) {
        match self.entries.iter_mut().find(|(n, _)| n == name) {
            Some(e) => e.1 = value,
            None => self.entries.push((name.to_string(), value)),
        }
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.entries.iter().find(|(n, _)| n == name).map(|e| e.1)
    }

    fn require(&self, name: &str) -> Result<f64> {
        self.get(name).ok_or_else(|| Error::SchemaMismatch(format!("missing input '{name}'")))
    }
}

pub trait BlackBoxModel: Sync {
    fn schema(&self) -> &ModelSchema;

    /// Raw outputs as name/value pairs; checked against the schema by
    /// [`run_external_model`].
    fn call(&self, inputs: &ParameterRow) -> Result<Vec<(String, f64)>>;
}

/// Evaluates `model`, returning the declared outputs in schema order.
pub fn run_external_model<M: BlackBoxModel + ?Sized>(model: &M, inputs: &ParameterRow) -> Result<Vec<f64>> {
    let schema = model.schema();
    for name in schema.input_names() {
        inputs.require(name)?;
    }
    let raw = model.call(inputs)?;
    schema
        .outputs
        .iter()
        .map(|name| {
            raw.iter()
                .find(|(n, _)| n == name)
                .map(|e| e.1)
                .ok_or_else(|| Error::SchemaMismatch(format!("model did not report output '{name}'")))
        })
        .collect()
}

/// Analytic stand-in for a crash-box impact simulation: internal energy
/// `½ M v² · r`, where the absorption ratio `r = 0.6 + 0.4 e^{-u}` drops as
/// the geometry departs from nominal. Not a physical crash model.
#[derive(Debug, Clone)]
pub struct CrashSurrogate {
    schema: ModelSchema,
    pub thickness_weight: f64,
    pub scale_weight: f64,
    /// Per squared degree of attack-angle offset.
    pub angle_weight: f64,
}

pub const CRASH_OUTPUT: &str = "internal_energy";

impl Default for CrashSurrogate {
    fn default() -> Self {
        let unit = |n: &str, u: &str| (n.to_string(), u.to_string());
        Self {
            schema: ModelSchema {
                inputs: alloc::vec![
                    unit("S_x", "-"),
                    unit("S_y", "-"),
                    unit("tau", "-"),
                    unit("alpha_x", "deg"),
                    unit("alpha_y", "deg"),
                    unit("M_I", "kg"),
                    unit("v_I", "m/s"),
                ],
                outputs: alloc::vec![CRASH_OUTPUT.to_string()],
            },
            thickness_weight: 0.3 / (0.03286 * 0.03286),
            scale_weight: 360.0,
            angle_weight: 0.3,
        }
    }
}

impl CrashSurrogate {
    pub fn absorption_ratio(&self, sx: f64, sy: f64, tau: f64, ax: f64, ay: f64) -> f64 {
        let thin = (tau - 1.0).min(0.0);
        let u = self.thickness_weight * thin * thin
            + self.scale_weight * ((sx - 1.0) * (sx - 1.0) + (sy - 1.0) * (sy - 1.0))
            + self.angle_weight * (ax * ax + ay * ay);
        0.6 + 0.4 * libm::exp(-u)
    }

    pub fn energy(&self, sx: f64, sy: f64, tau: f64, ax: f64, ay: f64, mass: f64, speed: f64) -> f64 {
        0.5 * mass * speed * speed * self.absorption_ratio(sx, sy, tau, ax, ay)
    }
}

impl BlackBoxModel for CrashSurrogate {
    fn schema(&self) -> &ModelSchema {
        &self.schema
    }

    fn call(&self, p: &ParameterRow) -> Result<Vec<(String, f64)>> {
        let e = self.energy(
            p.require("S_x")?,
            p.require("S_y")?,
            p.require("tau")?,
            p.require("alpha_x")?,
            p.require("alpha_y")?,
            p.require("M_I")?,
            p.require("v_I")?,
        );
        Ok(alloc::vec![(CRASH_OUTPUT.to_string(), e)])
    }
}
