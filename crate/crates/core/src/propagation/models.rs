//! Response models for the built-in problems.

use alloc::boxed::Box;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::problem::{AnalyticDensity, ResponseModel};
use crate::dynamics::{
    generate_white_noise, response_max, run_external_model, sdof_stationary_variance, simulate_boucwen, simulate_sdof,
    BlackBoxModel, IPSDConfig, MDOFBoucWenConfig, ParameterRow, SDOFConfig, SpectralGenerator,
};
use crate::error::{Error, Result};

/// Stationary displacement variance of the white-noise oscillator as a
/// function of its natural frequency (the only, epistemic, input).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SdofVarianceModel {
    pub zeta: f64,
    pub s0: f64,
}

impl ResponseModel for SdofVarianceModel {
    fn name(&self) -> &str {
        "sdof-variance"
    }

    fn qoi(&self) -> &str {
        "y1"
    }

    fn arity(&self) -> (usize, usize) {
        (0, 1)
    }

    fn evaluate(&self, _: &[f64], e: &[f64], _: u64) -> Result<f64> {
        if !(e[0] > 0.0) {
            return Err(Error::NonPositive(e[0]));
        }
        Ok(sdof_stationary_variance(self.zeta, e[0], self.s0))
    }
}

/// Displacement of the white-noise oscillator at the output time, simulated
/// from rest; the conditional law given `ω` is the stationary Gaussian.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SdofSteadyStateModel {
    pub zeta: f64,
    pub s0: f64,
    pub dt: f64,
    pub duration: f64,
}

impl ResponseModel for SdofSteadyStateModel {
    fn name(&self) -> &str {
        "sdof-steady-state"
    }

    fn qoi(&self) -> &str {
        "y2"
    }

    fn arity(&self) -> (usize, usize) {
        (0, 1)
    }

    fn evaluate(&self, _: &[f64], e: &[f64], noise_seed: u64) -> Result<f64> {
        let c = SDOFConfig::new(self.zeta, e[0], self.s0)?;
        let w = generate_white_noise(self.s0, self.dt, self.duration, noise_seed);
        let t = simulate_sdof(&c, &w, self.dt, self.duration)?;
        t.last("x").ok_or_else(|| Error::SchemaMismatch("x".into()))
    }

    fn analytic_conditional(&self, _: &[f64], e: &[f64]) -> Option<AnalyticDensity> {
        (e[0] > 0.0).then(|| AnalyticDensity::Normal {
            mean: 0.0,
            variance: sdof_stationary_variance(self.zeta, e[0], self.s0),
        })
    }
}

/// Peak first-story displacement of the hysteretic frame under a spectral
/// ground acceleration whose predominant frequency is the epistemic input.
/// Aleatory inputs: story stiffness multipliers, then hysteretic-amplitude
/// multipliers.
#[derive(Debug, Clone, PartialEq)]
pub struct BoucWenFrameModel {
    pub frame: MDOFBoucWenConfig,
    pub sigma2: f64,
    pub rho0: f64,
    pub dt: f64,
    pub duration: f64,
}

impl BoucWenFrameModel {
    pub fn ten_story() -> Self {
        Self { frame: MDOFBoucWenConfig::ten_story(), sigma2: 1.06, rho0: 17.33, dt: 0.005, duration: 10.0 }
    }
}

impl ResponseModel for BoucWenFrameModel {
    fn name(&self) -> &str {
        "boucwen-frame"
    }

    fn qoi(&self) -> &str {
        "x_max"
    }

    fn arity(&self) -> (usize, usize) {
        (2 * self.frame.stories(), 1)
    }

    fn evaluate(&self, a: &[f64], e: &[f64], noise_seed: u64) -> Result<f64> {
        let spec = IPSDConfig::new(self.sigma2, self.rho0, e[0])?;
        let ground = SpectralGenerator::new(spec, self.duration)?.realize(self.dt, self.duration, noise_seed);
        let frame = self.frame.clone().with_theta(a.to_vec());
        let t = simulate_boucwen(&frame, &ground, self.dt, self.duration)?;
        response_max(&t, "x1")
    }
}

/// Adapter exposing one output of a [`BlackBoxModel`] as a response model.
pub struct BlackBoxResponse {
    pub model: Box<dyn BlackBoxModel + Send>,
    pub aleatory_names: Vec<String>,
    pub epistemic_names: Vec<String>,
    pub output: String,
    label: String,
}

impl BlackBoxResponse {
    pub fn new(
        model: Box<dyn BlackBoxModel + Send>,
        aleatory_names: Vec<String>,
        epistemic_names: Vec<String>,
        output: impl Into<String>,
    ) -> Result<Self> {
        let output = output.into();
        let schema = model.schema();
        if !schema.outputs.contains(&output) {
            return Err(Error::SchemaMismatch(format!("model does not declare output '{output}'")));
        }
        for n in aleatory_names.iter().chain(&epistemic_names) {
            if !schema.input_names().any(|i| i == n) {
                return Err(Error::SchemaMismatch(format!("model does not declare input '{n}'")));
            }
        }
        let label = format!("black-box:{output}");
        Ok(Self { model, aleatory_names, epistemic_names, output, label })
    }

    fn row(&self, a: &[f64], e: &[f64]) -> ParameterRow {
        let mut row = ParameterRow::new();
        for (n, v) in self.aleatory_names.iter().zip(a).chain(self.epistemic_names.iter().zip(e)) {
            row.set(n, *v);
        }
        row
    }
}

impl ResponseModel for BlackBoxResponse {
    fn name(&self) -> &str {
        &self.label
    }

    fn qoi(&self) -> &str {
        &self.output
    }

    fn arity(&self) -> (usize, usize) {
        (self.aleatory_names.len(), self.epistemic_names.len())
    }

    fn evaluate(&self, a: &[f64], e: &[f64], _: u64) -> Result<f64> {
        let out = run_external_model(&*self.model, &self.row(a, e))?;
        let k = self.model.schema().outputs.iter().position(|o| *o == self.output).unwrap_or(0);
        Ok(out[k])
    }
}

pub fn crash_input_names() -> (Vec<String>, Vec<String>) {
    let a = ["S_x", "S_y", "tau", "alpha_x", "alpha_y"].iter().map(|s| s.to_string()).collect();
    let e = ["M_I", "v_I"].iter().map(|s| s.to_string()).collect();
    (a, e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::CrashSurrogate;

    #[test]
    fn variance_model_matches_closed_form() {
        let m = SdofVarianceModel { zeta: 0.05, s0: 1.0 };
        assert!((m.evaluate(&[], &[2.0], 0).unwrap() - 3.926_990_816_987_241).abs() < 1e-12);
    }

    #[test]
    fn crash_adapter_nominal() {
        let (a, e) = crash_input_names();
        let m = BlackBoxResponse::new(Box::new(CrashSurrogate::default()), a, e, "internal_energy").unwrap();
        let v = m.evaluate(&[1.0, 1.0, 1.0, 0.0, 0.0], &[800.0, 9.0], 0).unwrap();
        assert_eq!(v, 32_400.0);
        assert_eq!(m.arity(), (5, 2));
    }

    #[test]
    fn frame_model_runs() {
        let m = BoucWenFrameModel::ten_story();
        let v = m.evaluate(&[1.0; 20], &[30.0], 5).unwrap();
        assert!(v > 0.0 && v.is_finite());
        assert_eq!(v, m.evaluate(&[1.0; 20], &[30.0], 5).unwrap());
    }
}
