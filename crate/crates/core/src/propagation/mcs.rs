//! Sampling reference engines: double-loop Monte Carlo over an epistemic
//! grid and Monte Carlo at interval vertices.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use super::extremize::extremize_interval;
use super::problem::HybridProblem;
use super::result::{empirical_cdf, span_grid, CdfMember, PBoxResult, Provenance};
use crate::error::{invalid, Error, Result};
use crate::exec::Executor;
use crate::rng;
use crate::uncertainty::{sample_aleatory, EpistemicKind};

pub const DEFAULT_BUDGET: u64 = 10_000_000;
pub const MAX_VERTEX_DIMS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DlMcsSettings {
    /// Grid points per epistemic coordinate.
    pub n_outer: usize,
    /// Aleatory samples per outer point.
    pub n_inner: usize,
    pub seed: u64,
    pub budget: u64,
    pub x_nodes: usize,
}

impl Default for DlMcsSettings {
    fn default() -> Self {
        Self { n_outer: 21, n_inner: 2000, seed: 0, budget: DEFAULT_BUDGET, x_nodes: 1024 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VertexSettings {
    pub n_per_vertex: usize,
    pub seed: u64,
    pub x_nodes: usize,
}

impl Default for VertexSettings {
    fn default() -> Self {
        Self { n_per_vertex: 1000, seed: 0, x_nodes: 1024 }
    }
}

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    if n == 1 || a == b {
        return vec![0.5 * (a + b)];
    }
    (0..n).map(|k| if k + 1 == n { b } else { a + (b - a) * k as f64 / (n - 1) as f64 }).collect()
}

/// Cartesian product of axes, last axis fastest.
fn tensor(axes: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let mut out = vec![Vec::new()];
    for ax in axes {
        out = out.iter().flat_map(|p| ax.iter().map(move |&v| [p.as_slice(), &[v]].concat())).collect();
    }
    out
}

/// Double-loop Monte Carlo. Interval coordinates are scanned on a grid of
/// `n_outer` points; each inner sample of a p-box coordinate draws a level
/// `u` and takes the response range over `n_outer` points of the focal
/// interval `[F̄⁻¹(u), F̲⁻¹(u)]`. The same aleatory samples and excitation
/// seeds are reused at every outer point.
pub fn dl_mcs<E: Executor>(p: &HybridProblem, s: &DlMcsSettings, exec: &E) -> Result<PBoxResult> {
    p.validate()?;
    if s.n_outer == 0 || s.n_inner == 0 || s.x_nodes < 2 {
        return Err(invalid("settings", "n_outer, n_inner and x_nodes must be positive"));
    }
    let ne = p.epistemic.len();
    let mut axes = Vec::new();
    let mut pbox_coords = Vec::new();
    for (i, c) in p.epistemic.coords.iter().enumerate() {
        match &c.kind {
            EpistemicKind::Interval(iv) => axes.push((i, linspace(iv.lower, iv.upper, s.n_outer))),
            EpistemicKind::PBox { pbox, .. } => pbox_coords.push((i, pbox.clone())),
        }
    }
    let outer_nodes = tensor(&axes.iter().map(|a| a.1.clone()).collect::<Vec<_>>());
    let focal_points = if pbox_coords.is_empty() { 1 } else { s.n_outer.pow(pbox_coords.len() as u32) };
    let projected = (outer_nodes.len() as u64).saturating_mul(s.n_inner as u64).saturating_mul(focal_points as u64);
    if projected > s.budget {
        return Err(Error::BudgetExceeded { projected, cap: s.budget });
    }

    let samples = sample_aleatory(&p.aleatory_distributions(), s.n_inner, rng::derive_seed(s.seed, 1));
    let mut level_rng = rng::stream(rng::derive_seed(s.seed, 2), 0);
    let focal: Vec<Vec<Vec<f64>>> = (0..s.n_inner)
        .map(|_| {
            pbox_coords
                .iter()
                .map(|(_, pb)| {
                    let u = rng::open_unit(&mut level_rng);
                    linspace(pb.upper.quantile(u), pb.lower.quantile(u), s.n_outer)
                })
                .collect()
        })
        .collect();
    let noise_root = rng::derive_seed(s.seed, 3);
    let n_inner = s.n_inner;
    let jobs = exec.map_indexed(outer_nodes.len() * n_inner, |job| -> Result<(f64, f64)> {
        let (t, j) = (job / n_inner, job % n_inner);
        let mut theta = vec![0.0; ne];
        for ((i, _), &v) in axes.iter().zip(&outer_nodes[t]) {
            theta[*i] = v;
        }
        let noise = rng::derive_seed(noise_root, j as u64);
        let a = samples.row(j);
        let mut range = (f64::INFINITY, f64::NEG_INFINITY);
        for combo in tensor(&focal[j]) {
            for ((i, _), &v) in pbox_coords.iter().zip(&combo) {
                theta[*i] = v;
            }
            let y = p.model.evaluate(a, &theta, noise)?;
            range = (range.0.min(y), range.1.max(y));
        }
        Ok(range)
    });
    let ranges = jobs.into_iter().collect::<Result<Vec<_>>>()?;
    let all: Vec<f64> = ranges.iter().flat_map(|r| [r.0, r.1]).collect();
    let x = span_grid(&all, s.x_nodes, 0.02);

    let mut members = Vec::new();
    for (t, node) in outer_nodes.iter().enumerate() {
        let mut theta = vec![f64::NAN; ne];
        for ((i, _), &v) in axes.iter().zip(node) {
            theta[*i] = v;
        }
        let block = &ranges[t * n_inner..(t + 1) * n_inner];
        let lows: Vec<f64> = block.iter().map(|r| r.0).collect();
        members.push(CdfMember { label: format!("outer {t}"), theta: theta.clone(), cdf: empirical_cdf(&lows, &x) });
        if !pbox_coords.is_empty() {
            let highs: Vec<f64> = block.iter().map(|r| r.1).collect();
            members.push(CdfMember { label: format!("outer {t} focal max"), theta, cdf: empirical_cdf(&highs, &x) });
        }
    }
    let curves: Vec<Vec<f64>> = members.iter().map(|m| m.cdf.clone()).collect();
    let (lower, upper) = extremize_interval(&curves)?;
    let mut notes: Vec<String> = Vec::new();
    if !pbox_coords.is_empty() {
        notes.push("p-box coordinates propagated as random sets of focal intervals".into());
    }
    Ok(PBoxResult {
        x,
        lower,
        upper,
        node_conditionals: members.clone(),
        family: members,
        epistemic_names: p.epistemic_names(),
        provenance: Provenance {
            engine: "dl-mcs".into(),
            counts: vec![
                ("n_outer".into(), s.n_outer as u64),
                ("n_inner".into(), s.n_inner as u64),
                ("model_runs".into(), projected),
            ],
            seed: s.seed,
            runtime_secs: None,
            notes,
        },
    })
}

/// Monte Carlo at every combination of interval endpoints, with common
/// aleatory samples. The envelope is an inner approximation of the bounds,
/// exact when the response is monotone in each interval coordinate.
pub fn vertex_mcs<E: Executor>(p: &HybridProblem, s: &VertexSettings, exec: &E) -> Result<PBoxResult> {
    p.validate()?;
    if s.n_per_vertex == 0 || s.x_nodes < 2 {
        return Err(invalid("settings", "n_per_vertex and x_nodes must be positive"));
    }
    let ne = p.epistemic.len();
    let mut axes = Vec::new();
    for (i, c) in p.epistemic.coords.iter().enumerate() {
        match &c.kind {
            EpistemicKind::Interval(iv) => {
                let ends = if iv.lower == iv.upper { vec![iv.lower] } else { vec![iv.lower, iv.upper] };
                axes.push((i, ends));
            }
            EpistemicKind::PBox { .. } => {
                return Err(Error::Unsupported(format!("vertex sampling needs intervals; `{}` is a p-box", c.name)));
            }
        }
    }
    let d = axes.iter().filter(|a| a.1.len() == 2).count();
    if d > MAX_VERTEX_DIMS {
        return Err(Error::TooManyVertices(d));
    }
    let vertices = tensor(&axes.iter().map(|a| a.1.clone()).collect::<Vec<_>>());
    let n = s.n_per_vertex;
    let samples = sample_aleatory(&p.aleatory_distributions(), n, rng::derive_seed(s.seed, 1));
    let noise_root = rng::derive_seed(s.seed, 3);
    let jobs = exec.map_indexed(vertices.len() * n, |job| {
        let (t, j) = (job / n, job % n);
        let mut theta = vec![0.0; ne];
        for ((i, _), &v) in axes.iter().zip(&vertices[t]) {
            theta[*i] = v;
        }
        p.model.evaluate(samples.row(j), &theta, rng::derive_seed(noise_root, j as u64))
    });
    let ys = jobs.into_iter().collect::<Result<Vec<_>>>()?;
    let x = span_grid(&ys, s.x_nodes, 0.02);
    let members: Vec<CdfMember> = vertices
        .iter()
        .enumerate()
        .map(|(t, v)| {
            let mut theta = vec![0.0; ne];
            for ((i, _), &val) in axes.iter().zip(v) {
                theta[*i] = val;
            }
            CdfMember { label: format!("vertex {t}"), theta, cdf: empirical_cdf(&ys[t * n..(t + 1) * n], &x) }
        })
        .collect();
    let curves: Vec<Vec<f64>> = members.iter().map(|m| m.cdf.clone()).collect();
    let (lower, upper) = extremize_interval(&curves)?;
    Ok(PBoxResult {
        x,
        lower,
        upper,
        node_conditionals: members.clone(),
        family: members,
        epistemic_names: p.epistemic_names(),
        provenance: Provenance {
            engine: "vertex-mcs".into(),
            counts: vec![("n_per_vertex".into(), n as u64), ("vertices".into(), vertices.len() as u64)],
            seed: s.seed,
            runtime_secs: None,
            notes: vec!["inner approximation: exact only for responses monotone in each interval".into()],
        },
    })
}

/// Vertex samples only, for comparing individual vertex CDFs.
pub fn vertex_samples<E: Executor>(
    p: &HybridProblem,
    vertex: &[f64],
    s: &VertexSettings,
    exec: &E,
) -> Result<Vec<f64>> {
    if vertex.len() != p.epistemic.len() {
        return Err(Error::DimensionMismatch { expected: p.epistemic.len(), found: vertex.len() });
    }
    let samples = sample_aleatory(&p.aleatory_distributions(), s.n_per_vertex, rng::derive_seed(s.seed, 1));
    let noise_root = rng::derive_seed(s.seed, 3);
    exec.map_indexed(s.n_per_vertex, |j| {
        p.model.evaluate(samples.row(j), vertex, rng::derive_seed(noise_root, j as u64))
    })
    .into_iter()
    .collect()
}
