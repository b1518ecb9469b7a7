//! Single-loop propagation: representative points over the aleatory space
//! and a pseudo-density on the epistemic coordinates, one model run per
//! point, decoupled density evolution, then conditional CDFs extremized over
//! the epistemic coordinates.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use super::extremize::{cell_limits, masses_from_cumulative, monotone_bounds, reduce_tensor, Reducer};
use super::problem::HybridProblem;
use super::result::{CdfMember, PBoxResult, Provenance};
use crate::error::{invalid, Error, Result};
use crate::exec::Executor;
use crate::linalg::PointMatrix;
use crate::pdem::{
    assemble_joint, conditional_pdf, AugmentedResponseSpec, Bandwidth, DimSettings, SubPDFBundle, MIN_EFFECTIVE_POINTS,
};
use crate::points::{select_points, SelectionSettings};
use crate::rng;
use crate::uncertainty::{EpistemicKind, PseudoCoord, PseudoDensity, ScalarDistribution, ScalarPBox};

/// Weights of the bounding-input mixtures stored as family members for
/// p-box coordinates.
const MIX_LEVELS: [f64; 5] = [0.0, 0.25, 0.5, 0.75, 1.0];
/// Distance, in epistemic bandwidths, between the evaluation domain and
/// the edge of the sampled pseudo support.
const EDGE_BANDWIDTHS: f64 = 2.5;

#[derive(Debug, Clone, PartialEq)]
pub struct MpdemSettings {
    pub n_sel: usize,
    pub selection: SelectionSettings,
    pub seed: u64,
    /// Grid and kernel of the response dimension.
    pub response: DimSettings,
    /// Multiplier on the rule-of-thumb width of the epistemic kernels.
    pub theta_bandwidth_scale: f64,
    pub theta_nodes: usize,
    /// Evaluation nodes per interval coordinate.
    pub eval_points: usize,
    /// Evaluation nodes per p-box coordinate.
    pub pbox_eval_points: usize,
    /// Use the model's closed-form conditional density when it has one.
    pub inject_analytic: bool,
    pub min_effective_points: f64,
    /// Response grid half-width, in standard deviations, around injected
    /// densities when no extent is given.
    pub analytic_extent_sds: f64,
}

impl Default for MpdemSettings {
    fn default() -> Self {
        Self {
            n_sel: 800,
            selection: SelectionSettings::default(),
            seed: 0,
            response: DimSettings::default(),
            theta_bandwidth_scale: 1.0,
            theta_nodes: 256,
            eval_points: 33,
            pbox_eval_points: 33,
            inject_analytic: false,
            min_effective_points: MIN_EFFECTIVE_POINTS,
            analytic_extent_sds: 8.0,
        }
    }
}

/// Propagation output together with the density bundle it came from.
#[derive(Debug, Clone)]
pub struct MpdemRun {
    pub result: PBoxResult,
    pub bundle: SubPDFBundle,
    /// Representative points: aleatory columns, then sampled epistemic ones.
    pub points: PointMatrix,
    pub responses: Vec<f64>,
}

struct ActiveCoord {
    index: usize,
    lower: f64,
    upper: f64,
    pad: f64,
    bandwidth: f64,
    pbox: Option<ScalarPBox>,
}

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![0.5 * (a + b)];
    }
    (0..n).map(|k| if k + 1 == n { b } else { a + (b - a) * k as f64 / (n - 1) as f64 }).collect()
}

/// Padding that keeps the evaluation domain `EDGE_BANDWIDTHS` kernels
/// inside the sampled support. The kernel width follows the same rule as
/// the response, applied to the padded uniform's standard deviation.
fn epistemic_padding(width: f64, n: usize, scale: f64) -> Result<(f64, f64)> {
    let k = EDGE_BANDWIDTHS * scale * libm::pow(n as f64, -0.2) / libm::sqrt(12.0);
    if !(k > 0.0 && k < 0.45) {
        return Err(invalid("theta_bandwidth_scale", format!("gives a padding factor of {k}")));
    }
    let pad = k * width / (1.0 - 2.0 * k);
    Ok((pad, pad / EDGE_BANDWIDTHS))
}

pub fn propagate_mpdem<E: Executor>(p: &HybridProblem, s: &MpdemSettings, exec: &E) -> Result<PBoxResult> {
    run_mpdem(p, s, exec).map(|r| r.result)
}

pub fn run_mpdem<E: Executor>(p: &HybridProblem, s: &MpdemSettings, exec: &E) -> Result<MpdemRun> {
    p.validate()?;
    let ne = p.epistemic.len();
    if ne > 3 {
        return Err(Error::Unsupported(format!("{ne} epistemic coordinates; at most 3 are supported")));
    }
    if ne > 2 {
        log::warn!("{ne} epistemic coordinates: conditional estimates need many points");
    }
    if s.n_sel < 2 || s.eval_points == 0 || s.pbox_eval_points < 2 {
        return Err(invalid("settings", "need n_sel >= 2, eval_points >= 1, pbox_eval_points >= 2"));
    }

    let mut fixed = vec![0.0; ne];
    let mut active = Vec::new();
    for (i, c) in p.epistemic.coords.iter().enumerate() {
        let (lo, hi) = c.domain()?;
        if hi > lo {
            let (pad, bandwidth) = epistemic_padding(hi - lo, s.n_sel, s.theta_bandwidth_scale)?;
            let pbox = match &c.kind {
                EpistemicKind::PBox { pbox, .. } => Some(pbox.clone()),
                EpistemicKind::Interval(_) => None,
            };
            active.push(ActiveCoord { index: i, lower: lo, upper: hi, pad, bandwidth, pbox });
        } else {
            fixed[i] = lo;
        }
    }

    let na = p.aleatory.len();
    let mut space = p.aleatory_distributions();
    for a in &active {
        space.push(ScalarDistribution::Uniform { lower: a.lower - a.pad, upper: a.upper + a.pad });
    }
    if space.is_empty() {
        return Err(invalid("inputs", "nothing random to sample"));
    }
    let rps = select_points(&space, s.n_sel, &s.selection, s.seed, exec)?;
    let n = rps.points.rows();
    let noise_root = rng::derive_seed(s.seed, 0x5eed);
    let points = &rps.points;
    let runs = exec.map_indexed(n, |q| {
        let row = points.row(q);
        let mut theta = fixed.clone();
        for (k, a) in active.iter().enumerate() {
            theta[a.index] = row[na + k];
        }
        let noise = rng::derive_seed(noise_root, q as u64);
        let y = p.model.evaluate(&row[..na], &theta, noise)?;
        let analytic = if s.inject_analytic { p.model.analytic_conditional(&row[..na], &theta) } else { None };
        Ok((y, analytic))
    });
    let runs = runs.into_iter().collect::<Result<Vec<_>>>()?;
    let responses: Vec<f64> = runs.iter().map(|r| r.0).collect();

    let spec = AugmentedResponseSpec {
        qoi: p.model.qoi().into(),
        epistemic: active.iter().map(|a| p.epistemic.coords[a.index].name.clone()).collect(),
        output_time: p.output_time,
    };
    let inject = s.inject_analytic && runs.iter().all(|r| r.1.is_some());
    if s.inject_analytic && !inject {
        log::warn!("model {} has no closed-form conditional; using kernels", p.model.name());
    }
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|q| {
            let theta: Vec<f64> = active.iter().enumerate().map(|(k, _)| points.get(q, na + k)).collect();
            // injected slices are placed on the density's centre; the
            // simulated value is restored afterwards
            let y = if inject { runs[q].1.unwrap().span(0.0).0 } else { runs[q].0 };
            spec.row(y, &theta)
        })
        .collect();
    let values = PointMatrix::from_rows(&rows);

    let mut response = s.response;
    if inject && response.extent.is_none() {
        let (lo, hi) = runs.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| {
            let (a, b) = r.1.unwrap().span(s.analytic_extent_sds);
            (lo.min(a), hi.max(b))
        });
        response.extent = Some((lo, hi));
    }
    let mut dims = vec![response];
    for a in &active {
        let reach = a.pad + 5.0 * a.bandwidth;
        dims.push(DimSettings {
            nodes: s.theta_nodes,
            bandwidth: Bandwidth::Fixed(a.bandwidth),
            extent: Some((a.lower - reach, a.upper + reach)),
        });
    }
    let mut bundle = SubPDFBundle::build(&values, &rps.probabilities, &dims, exec)?;
    if inject {
        for (q, r) in runs.iter().enumerate() {
            let d = r.1.unwrap();
            bundle.inject_analytic_conditional(q, 0, |x| d.pdf(x))?;
            bundle.centers.set(q, 0, r.0);
        }
    }

    let result = extract_bounds(p, s, &bundle, &active, &fixed, n, inject, exec)?;
    Ok(MpdemRun { result, bundle, points: rps.points, responses })
}

#[allow(clippy::too_many_arguments)]
fn extract_bounds<E: Executor>(
    p: &HybridProblem,
    s: &MpdemSettings,
    bundle: &SubPDFBundle,
    active: &[ActiveCoord],
    fixed: &[f64],
    n: usize,
    inject: bool,
    exec: &E,
) -> Result<PBoxResult> {
    let view = assemble_joint(bundle);
    let axes: Vec<Vec<f64>> = active
        .iter()
        .map(|a| linspace(a.lower, a.upper, if a.pbox.is_some() { s.pbox_eval_points } else { s.eval_points }))
        .collect();
    let shape: Vec<usize> = axes.iter().map(Vec::len).collect();
    let total: usize = shape.iter().product();
    let pseudo = PseudoDensity {
        coords: active
            .iter()
            .map(|a| PseudoCoord::Uniform { lower: a.lower - a.pad, upper: a.upper + a.pad })
            .collect(),
    };
    let theta_dims: Vec<usize> = (1..=active.len()).collect();
    let node_theta = |t: usize| -> Vec<f64> {
        let mut idx = t;
        let mut v = vec![0.0; active.len()];
        for ax in (0..active.len()).rev() {
            v[ax] = axes[ax][idx % shape[ax]];
            idx /= shape[ax];
        }
        v
    };
    let conds = exec.map_indexed(total, |t| conditional_pdf(&view, 0, &theta_dims, &node_theta(t), &pseudo));
    let conds = conds.into_iter().collect::<Result<Vec<_>>>()?;
    let min_ess = conds.iter().map(|c| c.effective_points).fold(f64::INFINITY, f64::min);
    if min_ess < s.min_effective_points {
        return Err(Error::InsufficientPoints { effective: min_ess, required: s.min_effective_points });
    }
    let max_residual = conds.iter().map(|c| c.residual).fold(0.0, f64::max);

    let x = bundle.grids[0].points();
    let nx = x.len();
    let full_theta = |local: &[f64]| -> Vec<f64> {
        let mut th = fixed.to_vec();
        for (a, &v) in active.iter().zip(local) {
            th[a.index] = v;
        }
        th
    };
    let node_conditionals: Vec<CdfMember> = conds
        .iter()
        .enumerate()
        .map(|(t, c)| CdfMember { label: format!("node {t}"), theta: full_theta(&node_theta(t)), cdf: c.cdf.clone() })
        .collect();

    // interval axes outermost, p-box axes reduced first
    let mut perm: Vec<usize> = (0..active.len()).filter(|&k| active[k].pbox.is_none()).collect();
    perm.extend((0..active.len()).filter(|&k| active[k].pbox.is_some()));
    let pshape: Vec<usize> = perm.iter().map(|&k| shape[k]).collect();
    let mut strides = vec![1usize; active.len()];
    for ax in (0..active.len().saturating_sub(1)).rev() {
        strides[ax] = strides[ax + 1] * shape[ax + 1];
    }
    let to_original = |pt: usize| -> usize {
        let mut idx = pt;
        let mut orig = 0;
        for j in (0..perm.len()).rev() {
            orig += (idx % pshape[j]) * strides[perm[j]];
            idx /= pshape[j];
        }
        orig
    };
    let order: Vec<usize> = (0..total).map(to_original).collect();
    let limits: Vec<Option<(Vec<f64>, Vec<f64>, Vec<f64>, Vec<f64>)>> = perm
        .iter()
        .map(|&k| {
            active[k].pbox.as_ref().map(|pb| {
                let (lo, hi) = cell_limits(pb, &axes[k]);
                let w_up = masses_from_cumulative(&hi);
                let w_lo = masses_from_cumulative(&lo);
                (lo, hi, w_up, w_lo)
            })
        })
        .collect();
    let reducers: Vec<Reducer<'_>> = limits
        .iter()
        .map(|l| match l {
            None => Reducer::Interval,
            Some((lo, hi, w_up, w_lo)) => Reducer::PBox { lo, hi, w_up, w_lo },
        })
        .collect();

    let mut lower = vec![0.0; nx];
    let mut upper = vec![0.0; nx];
    let mut g = vec![0.0; total];
    for k in 0..nx {
        for (dst, &o) in g.iter_mut().zip(&order) {
            *dst = conds[o].cdf[k];
        }
        upper[k] = reduce_tensor(&g, &pshape, &reducers, true);
        lower[k] = reduce_tensor(&g, &pshape, &reducers, false);
    }
    let fix = monotone_bounds(&mut lower, &mut upper);

    let family = admissible_family(&node_conditionals, active, &perm, &pshape, &order, &limits, nx, &axes, &full_theta);
    let mut widened: f64 = 0.0;
    for m in &family {
        for k in 0..nx {
            widened = widened.max(lower[k] - m.cdf[k]).max(m.cdf[k] - upper[k]);
            lower[k] = lower[k].min(m.cdf[k]);
            upper[k] = upper[k].max(m.cdf[k]);
        }
    }

    let mut notes: Vec<String> = vec![
        format!("minimum effective points {min_ess:.2}"),
        format!("largest conditional renormalization {max_residual:.3e}"),
        format!("largest slice mass error {:.3e}", bundle.max_mass_error()),
        format!("monotone correction {fix:.3e}"),
        format!("envelope widening {widened:.3e}"),
    ];
    if inject {
        notes.push("closed-form conditional densities injected".into());
    }
    Ok(PBoxResult {
        x,
        lower,
        upper,
        family,
        node_conditionals,
        epistemic_names: p.epistemic_names(),
        provenance: Provenance {
            engine: "mpdem".into(),
            counts: vec![("n_sel".into(), n as u64), ("eval_nodes".into(), total as u64)],
            seed: s.seed,
            runtime_secs: None,
            notes,
        },
    })
}

/// Admissible CDFs: node conditionals when every coordinate is an interval;
/// otherwise, at each interval node, mixtures of the conditionals under
/// blends of the bounding input CDFs.
#[allow(clippy::too_many_arguments)]
fn admissible_family(
    nodes: &[CdfMember],
    active: &[ActiveCoord],
    perm: &[usize],
    pshape: &[usize],
    order: &[usize],
    limits: &[Option<(Vec<f64>, Vec<f64>, Vec<f64>, Vec<f64>)>],
    nx: usize,
    axes: &[Vec<f64>],
    full_theta: &dyn Fn(&[f64]) -> Vec<f64>,
) -> Vec<CdfMember> {
    let n_pbox = limits.iter().filter(|l| l.is_some()).count();
    if n_pbox == 0 {
        return nodes.to_vec();
    }
    let n_int = perm.len() - n_pbox;
    let outer: usize = pshape[..n_int].iter().product();
    let inner: usize = pshape[n_int..].iter().product();
    let mut out = Vec::new();
    for &lam in &MIX_LEVELS {
        let weights: Vec<Vec<f64>> = limits[n_int..]
            .iter()
            .map(|l| {
                let (_, _, w_up, w_lo) = l.as_ref().unwrap();
                w_up.iter().zip(w_lo).map(|(u, l)| lam * u + (1.0 - lam) * l).collect()
            })
            .collect();
        for o in 0..outer {
            let mut cdf = vec![0.0; nx];
            let mut local = vec![0.0; active.len()];
            for i in 0..inner {
                let mut w = 1.0;
                let mut idx = i;
                for j in (0..n_pbox).rev() {
                    let len = pshape[n_int + j];
                    let node = idx % len;
                    idx /= len;
                    w *= weights[j][node];
                }
                if w == 0.0 {
                    continue;
                }
                let c = &nodes[order[o * inner + i]].cdf;
                for (d, v) in cdf.iter_mut().zip(c) {
                    *d += w * v;
                }
            }
            for v in cdf.iter_mut() {
                *v = v.clamp(0.0, 1.0);
            }
            let mut idx = o;
            for j in (0..n_int).rev() {
                let k = perm[j];
                local[k] = axes[k][idx % pshape[j]];
                idx /= pshape[j];
            }
            for (j, w) in weights.iter().enumerate() {
                let k = perm[n_int + j];
                local[k] = w.iter().zip(&axes[k]).map(|(a, b)| a * b).sum();
            }
            out.push(CdfMember {
                label: format!("mixture {lam} at interval node {o}"),
                theta: full_theta(&local),
                cdf,
            });
        }
    }
    out
}
