use alloc::boxed::Box;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{invalid, Error, Result};
use crate::uncertainty::{EpistemicVector, ScalarDistribution};

/// Closed-form conditional density of the response at one point, used in
/// place of a kernel when the model knows it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AnalyticDensity {
    Normal { mean: f64, variance: f64 },
}

impl AnalyticDensity {
    pub fn pdf(&self, x: f64) -> f64 {
        match *self {
            Self::Normal { mean, variance } => {
                let s = libm::sqrt(variance);
                crate::special::std_normal_pdf((x - mean) / s) / s
            }
        }
    }

    /// Interval holding all but a negligible tail.
    pub fn span(&self, sds: f64) -> (f64, f64) {
        match *self {
            Self::Normal { mean, variance } => {
                let s = libm::sqrt(variance);
                (mean - sds * s, mean + sds * s)
            }
        }
    }
}

/// Deterministic map from (aleatory values, epistemic values, excitation
/// seed) to a scalar quantity of interest.
pub trait ResponseModel: Sync + Send {
    fn name(&self) -> &str;

    /// Name of the quantity of interest.
    fn qoi(&self) -> &str;

    /// Expected numbers of aleatory and epistemic values.
    fn arity(&self) -> (usize, usize);

    /// `noise_seed` drives any randomness internal to the model (for
    /// example a stochastic excitation); fixed seeds give fixed results.
    fn evaluate(&self, aleatory: &[f64], epistemic: &[f64], noise_seed: u64) -> Result<f64>;

    fn analytic_conditional(&self, _aleatory: &[f64], _epistemic: &[f64]) -> Option<AnalyticDensity> {
        None
    }
}

/// Inputs, model binding and output time of one propagation problem.
pub struct HybridProblem {
    pub name: String,
    pub aleatory: Vec<(String, ScalarDistribution)>,
    pub epistemic: EpistemicVector,
    pub model: Box<dyn ResponseModel>,
    pub output_time: f64,
}

impl core::fmt::Debug for HybridProblem {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("HybridProblem")
            .field("name", &self.name)
            .field("aleatory", &self.aleatory)
            .field("epistemic", &self.epistemic)
            .field("model", &self.model.name())
            .field("output_time", &self.output_time)
            .finish()
    }
}

impl HybridProblem {
    pub fn new(
        name: impl Into<String>,
        aleatory: Vec<(String, ScalarDistribution)>,
        epistemic: EpistemicVector,
        model: Box<dyn ResponseModel>,
        output_time: f64,
    ) -> Result<Self> {
        let p = Self { name: name.into(), aleatory, epistemic, model, output_time };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.aleatory.is_empty() && self.epistemic.is_empty() {
            return Err(invalid("inputs", "problem declares no inputs"));
        }
        let (na, ne) = self.model.arity();
        if na != self.aleatory.len() {
            return Err(Error::SchemaMismatch(format!(
                "model {} expects {na} aleatory inputs, problem declares {}",
                self.model.name(),
                self.aleatory.len()
            )));
        }
        if ne != self.epistemic.len() {
            return Err(Error::SchemaMismatch(format!(
                "model {} expects {ne} epistemic inputs, problem declares {}",
                self.model.name(),
                self.epistemic.len()
            )));
        }
        if !(self.output_time > 0.0) {
            return Err(invalid("output_time", "must be positive"));
        }
        for c in &self.epistemic.coords {
            c.domain()?;
            if let crate::uncertainty::EpistemicKind::PBox { pbox, .. } = &c.kind {
                pbox.validate()?;
            }
        }
        Ok(())
    }

    pub fn aleatory_distributions(&self) -> Vec<ScalarDistribution> {
        self.aleatory.iter().map(|(_, d)| *d).collect()
    }

    pub fn epistemic_names(&self) -> Vec<String> {
        self.epistemic.coords.iter().map(|c| c.name.clone()).collect()
    }
}
