//! Built-in problems assembled from a resolved configuration.

use anyhow::{anyhow, bail, Result};
use hybrid_pdem_core::analytic::{SDOFOracleConfig, SdofOracle};
use hybrid_pdem_core::dynamics::{CrashSurrogate, ModelSchema};
use hybrid_pdem_core::propagation::{
    crash_input_names, BlackBoxResponse, BoucWenFrameModel, HybridProblem, SdofSteadyStateModel, SdofVarianceModel,
};
use hybrid_pdem_core::uncertainty::{EpistemicCoord, EpistemicVector, IntervalParam, ScalarDistribution};

use crate::adapter::CommandAdapter;
use crate::config::{ExperimentConfig, ProblemKind};

fn req<T: Copy>(v: Option<T>, field: &str) -> Result<T> {
    v.ok_or_else(|| anyhow!("configuration is missing `{field}`; resolve it first"))
}

pub fn sdof_oracle(c: &ExperimentConfig) -> Result<SdofOracle> {
    let s = c.sdof.as_ref().ok_or_else(|| anyhow!("missing [sdof] section"))?;
    Ok(SdofOracle::new(SDOFOracleConfig {
        s0: req(s.s0, "sdof.s0")?,
        zeta: req(s.zeta, "sdof.zeta")?,
        mu1: req(s.mu1, "sdof.mu1")?,
        mu2: req(s.mu2, "sdof.mu2")?,
        sigma1: req(s.sigma1, "sdof.sigma1")?,
        sigma2: req(s.sigma2, "sdof.sigma2")?,
    })?)
}

fn interval(name: &str, r: [f64; 2]) -> Result<EpistemicCoord> {
    Ok(EpistemicCoord::interval(name, IntervalParam::new(r[0], r[1])?))
}

/// Aleatory inputs of the frame: stiffness multipliers, then hysteretic
/// amplitude multipliers.
pub fn frame_aleatory() -> Result<Vec<(String, ScalarDistribution)>> {
    let mut a = Vec::new();
    for j in 1..=10 {
        a.push((format!("theta{j}"), ScalarDistribution::uniform(0.7, 1.3)?));
    }
    for j in 11..=20 {
        a.push((format!("theta{j}"), ScalarDistribution::lognormal_from_moments(1.0, 0.15)?));
    }
    Ok(a)
}

pub fn crash_aleatory() -> Result<Vec<ScalarDistribution>> {
    Ok(vec![
        ScalarDistribution::normal(1.0, 1.0 / 60.0)?,
        ScalarDistribution::normal(1.0, 1.0 / 60.0)?,
        ScalarDistribution::normal(1.0, 0.03286)?,
        ScalarDistribution::uniform(-1.0, 1.0)?,
        ScalarDistribution::uniform(-1.0, 1.0)?,
    ])
}

pub fn build_problem(c: &ExperimentConfig) -> Result<HybridProblem> {
    let name = c.problem.name();
    let p = match c.problem {
        ProblemKind::SdofY1 | ProblemKind::SdofY2 => {
            let s = c.sdof.as_ref().unwrap();
            let oracle = sdof_oracle(c)?;
            let coord =
                EpistemicCoord::pbox("omega", oracle.input_pbox()).with_tail_eps(req(s.tail_eps, "sdof.tail_eps")?);
            let e = EpistemicVector::new(vec![coord]);
            let (zeta, s0) = (oracle.config.zeta, oracle.config.s0);
            if c.problem == ProblemKind::SdofY1 {
                HybridProblem::new(name, vec![], e, Box::new(SdofVarianceModel { zeta, s0 }), 1.0)?
            } else {
                let (dt, duration) = (req(s.dt, "sdof.dt")?, req(s.duration, "sdof.duration")?);
                let m = SdofSteadyStateModel { zeta, s0, dt, duration };
                HybridProblem::new(name, vec![], e, Box::new(m), duration)?
            }
        }
        ProblemKind::Boucwen => {
            let s = c.boucwen.as_ref().unwrap();
            let mut m = BoucWenFrameModel::ten_story();
            m.sigma2 = req(s.sigma2, "boucwen.sigma2")?;
            m.rho0 = req(s.rho0, "boucwen.rho0")?;
            m.dt = req(s.dt, "boucwen.dt")?;
            m.duration = req(s.duration, "boucwen.duration")?;
            let e = EpistemicVector::new(vec![interval("Omega_0", req(s.omega0, "boucwen.omega0")?)?]);
            let t = m.duration;
            HybridProblem::new(name, frame_aleatory()?, e, Box::new(m), t)?
        }
        ProblemKind::SurrogateCrash => {
            let s = c.crash.as_ref().unwrap();
            let (a, e) = crash_input_names();
            let model = BlackBoxResponse::new(
                Box::new(CrashSurrogate::default()),
                a.clone(),
                e,
                hybrid_pdem_core::dynamics::CRASH_OUTPUT,
            )?;
            let ep = EpistemicVector::new(vec![
                interval("M_I", req(s.mass, "crash.mass")?)?,
                interval("v_I", req(s.velocity, "crash.velocity")?)?,
            ]);
            HybridProblem::new(name, a.into_iter().zip(crash_aleatory()?).collect(), ep, Box::new(model), 1.0)?
        }
        ProblemKind::CustomAdapter => {
            let s = c.adapter.as_ref().unwrap();
            let inputs = s.inputs.clone().unwrap_or_default();
            let output = s.output.clone().unwrap();
            let mut aleatory = Vec::new();
            let mut coords = Vec::new();
            for i in &inputs {
                let [a, b] = i.params;
                match i.kind.as_str() {
                    "normal" => aleatory.push((i.name.clone(), ScalarDistribution::normal(a, b)?)),
                    "lognormal" => aleatory.push((i.name.clone(), ScalarDistribution::lognormal_from_moments(a, b)?)),
                    "uniform" => aleatory.push((i.name.clone(), ScalarDistribution::uniform(a, b)?)),
                    "interval" => coords.push(interval(&i.name, [a, b])?),
                    k => bail!("adapter input `{}` has unknown kind `{k}`", i.name),
                }
            }
            let schema = ModelSchema {
                inputs: inputs.iter().map(|i| (i.name.clone(), i.unit.clone())).collect(),
                outputs: vec![output.clone()],
            };
            let adapter = CommandAdapter {
                program: s.command.clone().unwrap().into(),
                args: s.args.clone().unwrap_or_default(),
                schema,
            };
            let a_names = aleatory.iter().map(|(n, _)| n.clone()).collect();
            let e_names = coords.iter().map(|c| c.name.clone()).collect();
            let model = BlackBoxResponse::new(Box::new(adapter), a_names, e_names, output)?;
            HybridProblem::new(name, aleatory, EpistemicVector::new(coords), Box::new(model), 1.0)?
        }
    };
    Ok(p)
}
