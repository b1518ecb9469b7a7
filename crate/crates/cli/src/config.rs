//! Experiment configuration: a TOML file with one table per concern. Every
//! key is optional; [`ExperimentConfig::resolve`] fills problem-specific
//! defaults so the resolved file can be replayed as is.

use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("{path}: {message}")]
    Parse { path: String, message: String },
    #[error("invalid value for `{field}`: {reason}")]
    Invalid { field: String, reason: String },
}

fn invalid(field: &str, reason: impl Into<String>) -> ConfigError {
    ConfigError::Invalid { field: field.into(), reason: reason.into() }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProblemKind {
    SdofY1,
    SdofY2,
    Boucwen,
    SurrogateCrash,
    CustomAdapter,
}

impl ProblemKind {
    pub const ALL: [ProblemKind; 5] =
        [Self::SdofY1, Self::SdofY2, Self::Boucwen, Self::SurrogateCrash, Self::CustomAdapter];

    pub fn name(self) -> &'static str {
        match self {
            Self::SdofY1 => "sdof-y1",
            Self::SdofY2 => "sdof-y2",
            Self::Boucwen => "boucwen",
            Self::SurrogateCrash => "surrogate-crash",
            Self::CustomAdapter => "custom-adapter",
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            Self::SdofY1 => "stationary displacement variance of a white-noise oscillator, p-box natural frequency",
            Self::SdofY2 => "stationary displacement of a white-noise oscillator, p-box natural frequency",
            Self::Boucwen => "peak first-story drift of a 10-story hysteretic frame, interval excitation frequency",
            Self::SurrogateCrash => {
                "absorbed energy of a closed-form crash surrogate, interval impactor mass and speed"
            }
            Self::CustomAdapter => "external executable exchanging key=value files",
        }
    }
}

impl fmt::Display for ProblemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EngineKind {
    Mpdem,
    DlMcs,
    VertexMcs,
    Analytic,
}

impl EngineKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::Mpdem => "mpdem",
            Self::DlMcs => "dl-mcs",
            Self::VertexMcs => "vertex-mcs",
            Self::Analytic => "analytic",
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SdofSection {
    pub zeta: Option<f64>,
    pub s0: Option<f64>,
    pub mu1: Option<f64>,
    pub mu2: Option<f64>,
    pub sigma1: Option<f64>,
    pub sigma2: Option<f64>,
    /// Tail probability at which the frequency p-box is truncated.
    pub tail_eps: Option<f64>,
    /// Integration step and output time of the simulated oscillator.
    pub dt: Option<f64>,
    pub duration: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoucwenSection {
    pub sigma2: Option<f64>,
    pub rho0: Option<f64>,
    pub omega0: Option<[f64; 2]>,
    pub dt: Option<f64>,
    pub duration: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CrashSection {
    pub mass: Option<[f64; 2]>,
    pub velocity: Option<[f64; 2]>,
}

/// One declared input of an external model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdapterInput {
    pub name: String,
    /// `normal`, `lognormal` (mean, cov), `uniform` or `interval`.
    pub kind: String,
    pub params: [f64; 2],
    #[serde(default)]
    pub unit: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdapterSection {
    /// Program to run; `{input}` and `{output}` in `args` are replaced by
    /// the paths of the exchange files.
    pub command: Option<String>,
    pub args: Option<Vec<String>>,
    pub inputs: Option<Vec<AdapterInput>>,
    pub output: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MpdemSection {
    pub n_sel: Option<usize>,
    /// `low-discrepancy`, `latin-hypercube` or `plain-mc`.
    pub strategy: Option<String>,
    /// `voronoi` or `equal`.
    pub assignment: Option<String>,
    pub pool_size: Option<usize>,
    pub response_nodes: Option<usize>,
    pub response_bandwidth_scale: Option<f64>,
    /// Fixed response bandwidth; overrides the scale.
    pub response_bandwidth: Option<f64>,
    pub response_extent: Option<[f64; 2]>,
    pub theta_bandwidth_scale: Option<f64>,
    pub theta_nodes: Option<usize>,
    pub eval_points: Option<usize>,
    pub pbox_eval_points: Option<usize>,
    pub inject_analytic: Option<bool>,
    pub min_effective_points: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DlMcsSection {
    pub n_outer: Option<usize>,
    pub n_inner: Option<usize>,
    pub budget: Option<u64>,
    pub x_nodes: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VertexSection {
    pub n_per_vertex: Option<usize>,
    pub x_nodes: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalyticSection {
    pub x_range: Option<[f64; 2]>,
    pub x_nodes: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub problem: ProblemKind,
    pub engine: EngineKind,
    pub seed: Option<u64>,
    pub output_dir: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sdof: Option<SdofSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub boucwen: Option<BoucwenSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub crash: Option<CrashSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub adapter: Option<AdapterSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mpdem: Option<MpdemSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dl_mcs: Option<DlMcsSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vertex: Option<VertexSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub analytic: Option<AnalyticSection>,
}

fn fill<T: Copy>(slot: &mut Option<T>, v: T) {
    slot.get_or_insert(v);
}

fn positive(field: &str, v: Option<f64>) -> Result<(), ConfigError> {
    match v {
        Some(x) if !(x > 0.0 && x.is_finite()) => Err(invalid(field, format!("must be positive and finite, got {x}"))),
        _ => Ok(()),
    }
}

fn range(field: &str, v: Option<[f64; 2]>) -> Result<(), ConfigError> {
    match v {
        Some([a, b]) if !(a <= b && a.is_finite() && b.is_finite()) => {
            Err(invalid(field, format!("needs finite lower <= upper, got [{a}, {b}]")))
        }
        _ => Ok(()),
    }
}

impl ExperimentConfig {
    pub fn parse(text: &str, origin: &str) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| ConfigError::Parse { path: origin.into(), message: e.to_string() })
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read { path: path.into(), source })?;
        Self::parse(&text, &path.display().to_string())
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration serializes")
    }

    /// Copy with every default written out for the chosen problem and
    /// engine, after validation.
    pub fn resolve(&self) -> Result<Self, ConfigError> {
        let mut c = self.clone();
        fill(&mut c.seed, 0);
        if c.output_dir.is_none() {
            c.output_dir = Some(PathBuf::from(format!("out/{}-{}", c.problem, c.engine.name())));
        }
        match c.problem {
            ProblemKind::SdofY1 | ProblemKind::SdofY2 => {
                let s = c.sdof.get_or_insert_with(Default::default);
                fill(&mut s.zeta, 0.05);
                fill(&mut s.s0, 1.0);
                fill(&mut s.mu1, 1.9);
                fill(&mut s.mu2, 2.1);
                fill(&mut s.sigma1, 0.1);
                fill(&mut s.sigma2, 0.2);
                fill(&mut s.tail_eps, 1e-4);
                if c.problem == ProblemKind::SdofY2 {
                    fill(&mut s.dt, 0.025);
                    fill(&mut s.duration, 180.0);
                }
            }
            ProblemKind::Boucwen => {
                let s = c.boucwen.get_or_insert_with(Default::default);
                fill(&mut s.sigma2, 1.06);
                fill(&mut s.rho0, 17.33);
                fill(&mut s.omega0, [23.91, 45.22]);
                fill(&mut s.dt, 0.005);
                fill(&mut s.duration, 10.0);
            }
            ProblemKind::SurrogateCrash => {
                let s = c.crash.get_or_insert_with(Default::default);
                fill(&mut s.mass, [650.0, 950.0]);
                fill(&mut s.velocity, [7.0, 11.0]);
            }
            ProblemKind::CustomAdapter => {
                let s = c.adapter.get_or_insert_with(Default::default);
                if s.command.is_none() {
                    return Err(invalid("adapter.command", "required for custom-adapter"));
                }
                if s.output.is_none() {
                    return Err(invalid("adapter.output", "required for custom-adapter"));
                }
                s.args.get_or_insert_with(|| vec!["{input}".into(), "{output}".into()]);
                s.inputs.get_or_insert_with(Vec::new);
            }
        }
        match c.engine {
            EngineKind::Mpdem => {
                let m = c.mpdem.get_or_insert_with(Default::default);
                mpdem_defaults(c.problem, m);
            }
            EngineKind::DlMcs => {
                let d = c.dl_mcs.get_or_insert_with(Default::default);
                fill(&mut d.n_outer, 21);
                fill(&mut d.n_inner, if c.problem == ProblemKind::Boucwen { 500 } else { 2000 });
                fill(&mut d.budget, hybrid_pdem_core::propagation::DEFAULT_BUDGET);
                fill(&mut d.x_nodes, 1024);
            }
            EngineKind::VertexMcs => {
                let v = c.vertex.get_or_insert_with(Default::default);
                fill(&mut v.n_per_vertex, 1000);
                fill(&mut v.x_nodes, 1024);
            }
            EngineKind::Analytic => {
                if !matches!(c.problem, ProblemKind::SdofY1 | ProblemKind::SdofY2) {
                    return Err(invalid("engine", format!("no closed form for problem {}", c.problem)));
                }
                let a = c.analytic.get_or_insert_with(Default::default);
                let default_range = if c.problem == ProblemKind::SdofY1 { [0.5, 25.0] } else { [-15.0, 15.0] };
                fill(&mut a.x_range, default_range);
                fill(&mut a.x_nodes, 1001);
            }
        }
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if let Some(s) = &self.sdof {
            positive("sdof.zeta", s.zeta)?;
            positive("sdof.s0", s.s0)?;
            positive("sdof.mu1", s.mu1)?;
            positive("sdof.mu2", s.mu2)?;
            positive("sdof.sigma1", s.sigma1)?;
            positive("sdof.sigma2", s.sigma2)?;
            positive("sdof.tail_eps", s.tail_eps)?;
            positive("sdof.dt", s.dt)?;
            positive("sdof.duration", s.duration)?;
            if let (Some(a), Some(b)) = (s.mu1, s.mu2) {
                if a > b {
                    return Err(invalid("sdof.mu1", "must not exceed sdof.mu2"));
                }
            }
        }
        if let Some(s) = &self.boucwen {
            positive("boucwen.sigma2", s.sigma2)?;
            positive("boucwen.rho0", s.rho0)?;
            positive("boucwen.dt", s.dt)?;
            positive("boucwen.duration", s.duration)?;
            range("boucwen.omega0", s.omega0)?;
        }
        if let Some(s) = &self.crash {
            range("crash.mass", s.mass)?;
            range("crash.velocity", s.velocity)?;
        }
        if let Some(a) = &self.adapter {
            for (k, i) in a.inputs.iter().flatten().enumerate() {
                if !["normal", "lognormal", "uniform", "interval"].contains(&i.kind.as_str()) {
                    return Err(invalid(&format!("adapter.inputs[{k}].kind"), format!("unknown kind `{}`", i.kind)));
                }
            }
        }
        if let Some(m) = &self.mpdem {
            if let Some(s) = &m.strategy {
                if !["low-discrepancy", "latin-hypercube", "plain-mc"].contains(&s.as_str()) {
                    return Err(invalid("mpdem.strategy", format!("unknown strategy `{s}`")));
                }
            }
            if let Some(s) = &m.assignment {
                if !["voronoi", "equal"].contains(&s.as_str()) {
                    return Err(invalid("mpdem.assignment", format!("unknown assignment `{s}`")));
                }
            }
            if m.n_sel == Some(0) {
                return Err(invalid("mpdem.n_sel", "must be positive"));
            }
            positive("mpdem.response_bandwidth_scale", m.response_bandwidth_scale)?;
            positive("mpdem.response_bandwidth", m.response_bandwidth)?;
            positive("mpdem.theta_bandwidth_scale", m.theta_bandwidth_scale)?;
            range("mpdem.response_extent", m.response_extent)?;
        }
        if let Some(d) = &self.dl_mcs {
            if d.n_outer == Some(0) || d.n_inner == Some(0) {
                return Err(invalid("dl_mcs", "n_outer and n_inner must be positive"));
            }
        }
        if let Some(a) = &self.analytic {
            range("analytic.x_range", a.x_range)?;
        }
        Ok(())
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }
}

/// Tuned settings per problem; see the README for the reasoning.
fn mpdem_defaults(problem: ProblemKind, m: &mut MpdemSection) {
    let (n_sel, assignment, nodes, x_scale, t_scale, eval, pbox_eval, inject) = match problem {
        ProblemKind::SdofY1 => (800, "voronoi", 1024, 0.05, 0.15, 33, 257, false),
        ProblemKind::SdofY2 => (200, "voronoi", 1024, 1.0, 0.3, 33, 129, true),
        ProblemKind::Boucwen => (1000, "equal", 1024, 0.2, 0.75, 33, 33, false),
        ProblemKind::SurrogateCrash => (40000, "equal", 1024, 0.1, 0.7, 9, 33, false),
        ProblemKind::CustomAdapter => (800, "voronoi", 512, 1.0, 1.0, 33, 33, false),
    };
    let strategy = if problem == ProblemKind::Boucwen { "plain-mc" } else { "low-discrepancy" };
    fill(&mut m.n_sel, n_sel);
    m.strategy.get_or_insert_with(|| strategy.into());
    m.assignment.get_or_insert_with(|| assignment.into());
    fill(&mut m.response_nodes, nodes);
    if m.response_bandwidth.is_none() {
        fill(&mut m.response_bandwidth_scale, x_scale);
    }
    fill(&mut m.theta_bandwidth_scale, t_scale);
    fill(&mut m.theta_nodes, if problem == ProblemKind::SurrogateCrash { 64 } else { 256 });
    fill(&mut m.eval_points, eval);
    fill(&mut m.pbox_eval_points, pbox_eval);
    fill(&mut m.inject_analytic, inject);
    fill(&mut m.min_effective_points, hybrid_pdem_core::pdem::MIN_EFFECTIVE_POINTS);
}

/// Annotated example listing every key.
pub const SCHEMA: &str = r#"# Experiment configuration (TOML). Every key except `problem` and `engine`
# is optional; defaults depend on the problem and are written to
# resolved_config.toml in the output directory.

problem = "sdof-y1"        # sdof-y1 | sdof-y2 | boucwen | surrogate-crash | custom-adapter
engine = "mpdem"           # mpdem | dl-mcs | vertex-mcs | analytic
seed = 0
output_dir = "out/sdof-y1-mpdem"

[sdof]                     # sdof-y1, sdof-y2
zeta = 0.05
s0 = 1.0
mu1 = 1.9                  # frequency p-box: split normals centred at mu1 and mu2
mu2 = 2.1
sigma1 = 0.1
sigma2 = 0.2
tail_eps = 1e-4            # p-box truncation probability
dt = 0.025                 # sdof-y2 only: integration step [s]
duration = 180.0           # sdof-y2 only: output time [s]

[boucwen]
sigma2 = 1.06              # excitation variance [m^2/s^4]
rho0 = 17.33               # spectral bandwidth [rad/s]
omega0 = [23.91, 45.22]    # interval predominant frequency [rad/s]
dt = 0.005
duration = 10.0

[crash]
mass = [650.0, 950.0]      # impactor mass interval [kg]
velocity = [7.0, 11.0]     # impactor speed interval [m/s]

[adapter]                  # custom-adapter
command = "./model.sh"
args = ["{input}", "{output}"]
output = "energy"
inputs = [
  { name = "a", kind = "normal", params = [0.0, 1.0] },
  { name = "b", kind = "interval", params = [1.0, 2.0], unit = "kg" },
]

[mpdem]
n_sel = 800
strategy = "low-discrepancy"   # low-discrepancy | latin-hypercube | plain-mc
assignment = "voronoi"         # voronoi | equal
pool_size = 80000
response_nodes = 1024
response_bandwidth_scale = 0.05
# response_bandwidth = 0.01    # fixed value, overrides the scale
# response_extent = [0.0, 30.0]
theta_bandwidth_scale = 0.15
theta_nodes = 256
eval_points = 33               # per interval coordinate
pbox_eval_points = 257         # per p-box coordinate
inject_analytic = false
min_effective_points = 8.0

[dl_mcs]
n_outer = 21
n_inner = 2000
budget = 10000000
x_nodes = 1024

[vertex]
n_per_vertex = 1000
x_nodes = 1024

[analytic]                     # sdof-y1, sdof-y2
x_range = [0.5, 25.0]
x_nodes = 1001
"#;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn schema_example_parses() {
        let c = ExperimentConfig::parse(SCHEMA, "schema").unwrap();
        assert_eq!(c.problem, ProblemKind::SdofY1);
        c.resolve().unwrap();
    }

    #[test]
    fn resolved_config_round_trips() {
        for p in ProblemKind::ALL {
            if p == ProblemKind::CustomAdapter {
                continue;
            }
            let c = ExperimentConfig::parse(&format!("problem = \"{p}\"\nengine = \"mpdem\""), "inline").unwrap();
            let r = c.resolve().unwrap();
            let again = ExperimentConfig::parse(&r.to_toml(), "resolved").unwrap();
            assert_eq!(again, r);
            assert_eq!(again.resolve().unwrap(), r);
        }
    }

    #[test]
    fn negative_zeta_names_the_field() {
        let c =
            ExperimentConfig::parse("problem = \"sdof-y1\"\nengine = \"mpdem\"\n[sdof]\nzeta = -0.05\n", "x").unwrap();
        let e = c.resolve().unwrap_err();
        assert!(e.to_string().contains("sdof.zeta"), "{e}");
    }

    #[test]
    fn unknown_key_is_reported_with_its_line() {
        let e = ExperimentConfig::parse("problem = \"sdof-y1\"\nengine = \"mpdem\"\n[mpdem]\nnsel = 3\n", "cfg.toml")
            .unwrap_err()
            .to_string();
        assert!(e.contains("nsel") && e.contains("line 4"), "{e}");
    }

    #[test]
    fn analytic_engine_needs_a_closed_form() {
        let c = ExperimentConfig::parse("problem = \"boucwen\"\nengine = \"analytic\"", "x").unwrap();
        assert!(c.resolve().unwrap_err().to_string().contains("engine"));
    }
}
