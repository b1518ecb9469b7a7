//! Experiment orchestration: run an engine, write artifacts and a manifest;
//! compare stored results.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context, Result};
use hybrid_pdem_core::pdem::{Bandwidth, DimSettings};
use hybrid_pdem_core::points::{Assignment, SelectionSettings, Strategy};
use hybrid_pdem_core::propagation::{
    dl_mcs, envelope_check, propagate_mpdem, vertex_mcs, DlMcsSettings, EnvelopeReport, MpdemSettings, PBoxResult,
    Provenance, VertexSettings,
};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::{EngineKind, ExperimentConfig, MpdemSection, ProblemKind};
use crate::exec::RayonExecutor;
use crate::io;
use crate::problems::{build_problem, sdof_oracle};

/// Largest number of conditional CDFs written as separate plot series.
const MAX_PLOT_SERIES: usize = 33;

/// Tolerance on the envelope invariant checked before artifacts are written.
pub const ENVELOPE_TOL: f64 = 1e-9;

/// Command-line overrides applied before defaults are resolved.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub workers: Option<usize>,
}

#[derive(Debug, Serialize)]
pub struct Manifest {
    pub library_version: String,
    pub problem: String,
    pub engine: String,
    pub seed: u64,
    pub workers: usize,
    pub runtime_secs: f64,
    pub counts: BTreeMap<String, u64>,
    pub notes: Vec<String>,
    pub envelope_violation: f64,
    pub tolerances: BTreeMap<String, f64>,
    pub config: serde_json::Value,
    /// SHA-256 of every artifact, keyed by path relative to the output
    /// directory.
    pub artifacts: BTreeMap<String, String>,
}

pub struct RunOutcome {
    pub result: PBoxResult,
    pub manifest: Manifest,
    pub output_dir: PathBuf,
}

/// Exclusive claim on an output directory, released on drop.
struct DirLock(PathBuf);

impl DirLock {
    fn acquire(dir: &Path) -> Result<Self> {
        let path = dir.join(".lock");
        fs::OpenOptions::new().write(true).create_new(true).open(&path).with_context(|| {
            format!("output directory {} is in use (remove {} if stale)", dir.display(), path.display())
        })?;
        Ok(Self(path))
    }
}

impl Drop for DirLock {
    fn drop(&mut self) {
        let _ = fs::remove_file(&self.0);
    }
}

pub fn mpdem_settings(m: &MpdemSection, seed: u64) -> Result<MpdemSettings> {
    let strategy = match m.strategy.as_deref().unwrap_or("low-discrepancy") {
        "low-discrepancy" => Strategy::LowDiscrepancy,
        "latin-hypercube" => Strategy::LatinHypercube,
        "plain-mc" => Strategy::PlainMc,
        s => bail!("unknown strategy `{s}`"),
    };
    let assignment = match m.assignment.as_deref().unwrap_or("voronoi") {
        "voronoi" => Assignment::Voronoi,
        "equal" => Assignment::Equal,
        s => bail!("unknown assignment `{s}`"),
    };
    let d = MpdemSettings::default();
    let mut response = DimSettings::default().with_nodes(m.response_nodes.unwrap_or(d.response.nodes));
    response.bandwidth = match (m.response_bandwidth, m.response_bandwidth_scale) {
        (Some(b), _) => Bandwidth::Fixed(b),
        (None, Some(scale)) => Bandwidth::Rule { scale },
        (None, None) => d.response.bandwidth,
    };
    response.extent = m.response_extent.map(|[a, b]| (a, b));
    Ok(MpdemSettings {
        n_sel: m.n_sel.unwrap_or(d.n_sel),
        selection: SelectionSettings { strategy, assignment, pool_size: m.pool_size },
        seed,
        response,
        theta_bandwidth_scale: m.theta_bandwidth_scale.unwrap_or(d.theta_bandwidth_scale),
        theta_nodes: m.theta_nodes.unwrap_or(d.theta_nodes),
        eval_points: m.eval_points.unwrap_or(d.eval_points),
        pbox_eval_points: m.pbox_eval_points.unwrap_or(d.pbox_eval_points),
        inject_analytic: m.inject_analytic.unwrap_or(d.inject_analytic),
        min_effective_points: m.min_effective_points.unwrap_or(d.min_effective_points),
        analytic_extent_sds: d.analytic_extent_sds,
    })
}

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n).map(|k| if k + 1 == n { b } else { a + (b - a) * k as f64 / (n - 1) as f64 }).collect()
}

/// Closed-form bound curves of the oscillator problems on `x`.
pub fn sdof_reference(c: &ExperimentConfig, x: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    let oracle = sdof_oracle(c)?;
    let mut lower = Vec::with_capacity(x.len());
    let mut upper = Vec::with_capacity(x.len());
    for &v in x {
        let (l, u) = match c.problem {
            ProblemKind::SdofY1 if v <= 0.0 => (0.0, 0.0),
            ProblemKind::SdofY1 => oracle.y1_bounds(v)?,
            _ => oracle.y2_bounds(v)?,
        };
        lower.push(l);
        upper.push(u);
    }
    Ok((lower, upper))
}

/// Runs the engine selected by a resolved configuration.
pub fn run_engine(c: &ExperimentConfig, exec: &RayonExecutor) -> Result<PBoxResult> {
    let seed = c.seed();
    let r = match c.engine {
        EngineKind::Analytic => {
            let a = c.analytic.as_ref().unwrap();
            let [lo, hi] = a.x_range.unwrap();
            let x = linspace(lo, hi, a.x_nodes.unwrap());
            let (lower, upper) = sdof_reference(c, &x)?;
            PBoxResult {
                x,
                lower,
                upper,
                family: vec![],
                node_conditionals: vec![],
                epistemic_names: vec!["omega".into()],
                provenance: Provenance { engine: "analytic".into(), seed, ..Default::default() },
            }
        }
        EngineKind::Mpdem => {
            let p = build_problem(c)?;
            propagate_mpdem(&p, &mpdem_settings(c.mpdem.as_ref().unwrap(), seed)?, exec)?
        }
        EngineKind::DlMcs => {
            let p = build_problem(c)?;
            let d = c.dl_mcs.as_ref().unwrap();
            let s = DlMcsSettings {
                n_outer: d.n_outer.unwrap(),
                n_inner: d.n_inner.unwrap(),
                seed,
                budget: d.budget.unwrap(),
                x_nodes: d.x_nodes.unwrap(),
            };
            dl_mcs(&p, &s, exec)?
        }
        EngineKind::VertexMcs => {
            let p = build_problem(c)?;
            let v = c.vertex.as_ref().unwrap();
            let s = VertexSettings { n_per_vertex: v.n_per_vertex.unwrap(), seed, x_nodes: v.x_nodes.unwrap() };
            vertex_mcs(&p, &s, exec)?
        }
    };
    Ok(r)
}

fn sha256_file(path: &Path) -> Result<String> {
    let bytes = fs::read(path)?;
    Ok(Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect())
}

/// Writes every artifact of `r` under `dir` and returns their relative
/// paths.
pub fn write_artifacts(dir: &Path, c: &ExperimentConfig, r: &PBoxResult) -> Result<Vec<String>> {
    let mut files =
        vec!["pbox_bounds.csv".to_string(), "conditionals.csv".to_string(), "resolved_config.toml".to_string()];
    io::write_bounds(&dir.join("pbox_bounds.csv"), r)?;
    io::write_conditionals(&dir.join("conditionals.csv"), &r.epistemic_names, &r.x, &r.node_conditionals)?;
    // The output location is not part of the experiment, so replaying the
    // file elsewhere reproduces every checksum.
    let portable = ExperimentConfig { output_dir: None, ..c.clone() };
    io::write_text(&dir.join("resolved_config.toml"), &portable.to_toml())?;
    let plot = dir.join("plot");
    if plot.exists() {
        fs::remove_dir_all(&plot)?;
    }
    fs::create_dir_all(&plot)?;
    let mut series = |name: &str, y: &[f64]| -> Result<()> {
        io::write_columns(&plot.join(name), &["x", "cdf"], &[&r.x, y])?;
        files.push(format!("plot/{name}"));
        Ok(())
    };
    series("lower.csv", &r.lower)?;
    series("upper.csv", &r.upper)?;
    if matches!(c.problem, ProblemKind::SdofY1 | ProblemKind::SdofY2) && c.engine != EngineKind::Analytic {
        let (lo, up) = sdof_reference(c, &r.x)?;
        series("reference_lower.csv", &lo)?;
        series("reference_upper.csv", &up)?;
    }
    let n = r.node_conditionals.len();
    let step = n.div_ceil(MAX_PLOT_SERIES).max(1);
    for k in (0..n).step_by(step) {
        series(&format!("conditional_{k:04}.csv"), &r.node_conditionals[k].cdf)?;
    }
    Ok(files)
}

pub fn run_experiment(config: &ExperimentConfig, ov: &Overrides) -> Result<RunOutcome> {
    let mut c = config.clone();
    if ov.seed.is_some() {
        c.seed = ov.seed;
    }
    if ov.out.is_some() {
        c.output_dir = ov.out.clone();
    }
    let c = c.resolve()?;
    let dir = c.output_dir.clone().unwrap();
    fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    let _lock = DirLock::acquire(&dir)?;
    let workers = crate::exec::resolve_workers(ov.workers);
    let exec = RayonExecutor::new(workers)?;
    log::info!("running {} with {} on {} workers", c.problem, c.engine.name(), workers);

    let t0 = Instant::now();
    let mut r =
        run_engine(&c, &exec).with_context(|| format!("engine {} on problem {}", c.engine.name(), c.problem))?;
    let runtime = t0.elapsed().as_secs_f64();
    r.provenance.runtime_secs = Some(runtime);
    let violation = r.envelope_violation();
    if violation > ENVELOPE_TOL {
        bail!("bound curves miss a family member by {violation:e}");
    }

    let files = write_artifacts(&dir, &c, &r)?;
    let mut artifacts = BTreeMap::new();
    for f in &files {
        artifacts.insert(f.clone(), sha256_file(&dir.join(f))?);
    }
    let manifest = Manifest {
        library_version: env!("CARGO_PKG_VERSION").into(),
        problem: c.problem.name().into(),
        engine: r.provenance.engine.clone(),
        seed: c.seed(),
        workers: exec.workers(),
        runtime_secs: runtime,
        counts: r.provenance.counts.iter().cloned().collect(),
        notes: r.provenance.notes.clone(),
        envelope_violation: violation,
        tolerances: BTreeMap::from([("envelope".to_string(), ENVELOPE_TOL)]),
        config: serde_json::to_value(&c)?,
        artifacts,
    };
    io::write_text(&dir.join("manifest.json"), &serde_json::to_string_pretty(&manifest)?)?;
    Ok(RunOutcome { result: r, manifest, output_dir: dir })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum CheckKind {
    /// Both Kolmogorov distances within the tolerance.
    Agreement,
    /// A encloses B within the tolerance.
    Envelope,
    Both,
}

#[derive(Debug, Clone, Serialize)]
pub struct Comparison {
    pub ks_lower: f64,
    pub ks_upper: f64,
    pub envelope_violation: f64,
    pub tol: f64,
    pub agreement_pass: bool,
    pub envelope_pass: bool,
    pub pass: bool,
}

fn bounds_path(p: &Path) -> PathBuf {
    if p.is_dir() {
        p.join("pbox_bounds.csv")
    } else {
        p.to_path_buf()
    }
}

fn as_result(b: io::Bounds) -> PBoxResult {
    PBoxResult {
        x: b.x,
        lower: b.lower,
        upper: b.upper,
        family: vec![],
        node_conditionals: vec![],
        epistemic_names: vec![],
        provenance: Provenance::default(),
    }
}

/// Compares the bounds stored at `a` (outer) and `b` (inner); either may be
/// a run directory or a bounds CSV.
pub fn compare_runs(a: &Path, b: &Path, tol: f64, check: CheckKind) -> Result<Comparison> {
    let ra = as_result(io::read_bounds(&bounds_path(a))?);
    let rb = as_result(io::read_bounds(&bounds_path(b))?);
    let rep: EnvelopeReport = envelope_check(&ra, &rb, tol);
    let agreement_pass = rep.ks_lower <= tol && rep.ks_upper <= tol;
    let pass = match check {
        CheckKind::Agreement => agreement_pass,
        CheckKind::Envelope => rep.pass,
        CheckKind::Both => agreement_pass && rep.pass,
    };
    Ok(Comparison {
        ks_lower: rep.ks_lower,
        ks_upper: rep.ks_upper,
        envelope_violation: rep.max_violation,
        tol,
        agreement_pass,
        envelope_pass: rep.pass,
        pass,
    })
}
