// Licensed under the Apache License, Version 2.0 (the "License"); you may
// not use this file except in compliance with the License. You may obtain
// a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS, WITHOUT
// WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied. See the
// License for the specific language governing permissions and limitations
// under the License.

//! Likelihoods of partially observed walks.
//!
//! A walk from s to t is only seen through a few of its edges or interior
//! nodes. Each observation law marginalizes over every path consistent
//! with the evidence, which collapses to a weighted block-chain series
//! (see [`crate::series`]) divided by the plain path-weight total.
//!
//! The single-item laws assume exactly one item was recorded, drawn
//! uniformly (edges: from the walk's edges; nodes: from its interior
//! positions, the walk being observable only after its first step). The
//! multi-item laws additionally treat the number of recorded items as
//! uniform over its admissible range, so a one-item sequence under a
//! multi-item law carries an extra size-prior factor and is not the same
//! value as the single-item law. The binomial variant replaces the
//! uniform size prior with per-step coin flips of probability `p_mu`,
//! conditioned on at least one item being seen, and admits a closed-form
//! linear-system evaluation.

use std::collections::HashMap;

use nalgebra::DVector;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::mle_complete::{complete_observation_log_likelihood, MleResult, MleStatus};
use crate::rsp::RspContext;
use crate::sampler::{Observation, ObservationKind, Trajectory, TrajectorySet};
use crate::series::{
    chain_series_log, AbsorbedLu, ChainSpec, Coupling, Seed, SeriesConfig, WeightLaw,
    NEGLIGIBLE_RATIO_LOG,
};

/// Per-step observation model: each step of the walk is recorded
/// independently with probability `p_mu`.
#[derive(Debug, Clone, Copy)]
pub struct BinomialObservationModel {
    p_mu: f64,
    q_mu: f64,
}

impl BinomialObservationModel {
    pub fn new(p_mu: f64) -> Result<Self> {
        if !(p_mu > 0.0 && p_mu < 1.0) {
            return Err(Error::BadParameter {
                what: format!("observation probability must be in (0, 1), got {p_mu}"),
            });
        }
        Ok(Self { p_mu, q_mu: 1.0 - p_mu })
    }

    pub fn p_mu(&self) -> f64 {
        self.p_mu
    }

    pub fn q_mu(&self) -> f64 {
        self.q_mu
    }
}

/// ln of the total path weight, with unreachable pairs as a hard error:
/// a likelihood conditioned on reaching t is undefined without paths.
fn ln_partition_checked(ctx: &RspContext, s: usize, t: usize) -> Result<f64> {
    let lnz = ctx.log_partition_function(s, t)?;
    if lnz == f64::NEG_INFINITY {
        return Err(Error::Unreachable { s, t });
    }
    Ok(lnz)
}

pub(crate) fn one_edge_with(
    ctx: &RspContext,
    s: usize,
    t: usize,
    edge: (usize, usize),
    cfg: &SeriesConfig,
    lu: &AbsorbedLu,
) -> Result<f64> {
    let lnz = ln_partition_checked(ctx, s, t)?;
    let series = chain_series_log(
        ctx.graph(),
        ctx.likelihood_weights(),
        &ChainSpec {
            t,
            seed: Seed::Unit(s),
            couplings: &[Coupling::Edge { src: edge.0, dst: edge.1 }],
            law: WeightLaw::InvK,
            ln_floor: lnz + NEGLIGIBLE_RATIO_LOG,
        },
        cfg,
        lu,
    )?;
    Ok(series - lnz)
}

/// Log-probability that a single uniformly drawn edge of a hitting s-t
/// walk is `edge`. −∞ when no admitting path exists.
pub fn one_edge_log_likelihood(
    ctx: &RspContext,
    s: usize,
    t: usize,
    edge: (usize, usize),
) -> Result<f64> {
    let lu = AbsorbedLu::new(ctx.graph(), ctx.likelihood_weights(), t);
    one_edge_with(ctx, s, t, edge, &SeriesConfig::default(), &lu)
}

pub(crate) fn one_node_with(
    ctx: &RspContext,
    s: usize,
    t: usize,
    node: usize,
    cfg: &SeriesConfig,
    lu: &AbsorbedLu,
) -> Result<f64> {
    let lnz = ln_partition_checked(ctx, s, t)?;
    let series = chain_series_log(
        ctx.graph(),
        ctx.likelihood_weights(),
        &ChainSpec {
            t,
            // The walk becomes observable after its first step, so the
            // chain starts from the weighted successors of s.
            seed: Seed::WeightedRow(s),
            couplings: &[Coupling::NodeRow { node }],
            law: WeightLaw::InvK,
            ln_floor: lnz + NEGLIGIBLE_RATIO_LOG,
        },
        cfg,
        lu,
    )?;
    Ok(series - lnz)
}

/// Log-probability that a single node drawn uniformly from the interior
/// positions of a hitting s-t walk is `node`.
pub fn one_node_log_likelihood(
    ctx: &RspContext,
    s: usize,
    t: usize,
    node: usize,
) -> Result<f64> {
    let lu = AbsorbedLu::new(ctx.graph(), ctx.likelihood_weights(), t);
    one_node_with(ctx, s, t, node, &SeriesConfig::default(), &lu)
}

pub(crate) fn multi_edge_with(
    ctx: &RspContext,
    s: usize,
    t: usize,
    edges: &[(usize, usize)],
    cfg: &SeriesConfig,
    lu: &AbsorbedLu,
) -> Result<f64> {
    if edges.is_empty() {
        return Err(Error::BadObservation { reason: "empty edge sequence".into() });
    }
    let lnz = ln_partition_checked(ctx, s, t)?;
    let couplings: Vec<Coupling> = edges
        .iter()
        .map(|&(src, dst)| Coupling::Edge { src, dst })
        .collect();
    let series = chain_series_log(
        ctx.graph(),
        ctx.likelihood_weights(),
        &ChainSpec {
            t,
            seed: Seed::Unit(s),
            couplings: &couplings,
            law: WeightLaw::ChooseInvK { m: edges.len() },
            ln_floor: lnz + NEGLIGIBLE_RATIO_LOG,
        },
        cfg,
        lu,
    )?;
    Ok(series - lnz)
}

/// Log-probability of an ordered edge sequence subsampled from a hitting
/// s-t walk: the sequence length is uniform on {1..L} and the edges are a
/// uniform ordered draw without replacement.
pub fn multi_edge_log_likelihood(
    ctx: &RspContext,
    s: usize,
    t: usize,
    edges: &[(usize, usize)],
) -> Result<f64> {
    let lu = AbsorbedLu::new(ctx.graph(), ctx.likelihood_weights(), t);
    multi_edge_with(ctx, s, t, edges, &SeriesConfig::default(), &lu)
}

pub(crate) fn multi_node_with(
    ctx: &RspContext,
    s: usize,
    t: usize,
    nodes: &[usize],
    cfg: &SeriesConfig,
    lu: &AbsorbedLu,
) -> Result<f64> {
    if nodes.is_empty() {
        return Err(Error::BadObservation { reason: "empty node sequence".into() });
    }
    let lnz = ln_partition_checked(ctx, s, t)?;
    let couplings: Vec<Coupling> = nodes.iter().map(|&node| Coupling::NodeRow { node }).collect();
    let series = chain_series_log(
        ctx.graph(),
        ctx.likelihood_weights(),
        &ChainSpec {
            t,
            seed: Seed::WeightedRow(s),
            couplings: &couplings,
            law: WeightLaw::ChooseInvK { m: nodes.len() },
            ln_floor: lnz + NEGLIGIBLE_RATIO_LOG,
        },
        cfg,
        lu,
    )?;
    Ok(series - lnz)
}

/// Log-probability of an ordered interior-node sequence subsampled from a
/// hitting s-t walk: the length is uniform on {1..L−1} and the nodes are a
/// uniform ordered draw without replacement from the interior positions.
pub fn multi_node_log_likelihood(
    ctx: &RspContext,
    s: usize,
    t: usize,
    nodes: &[usize],
) -> Result<f64> {
    let lu = AbsorbedLu::new(ctx.graph(), ctx.likelihood_weights(), t);
    multi_node_with(ctx, s, t, nodes, &SeriesConfig::default(), &lu)
}

/// Mirrors the chain validation for the linear-solve route, resolving
/// each observed edge to (source node, edge index).
fn resolve_edges(
    graph: &Graph,
    t: usize,
    edges: &[(usize, usize)],
) -> Result<Vec<(usize, usize)>> {
    if edges.is_empty() {
        return Err(Error::BadObservation { reason: "empty edge sequence".into() });
    }
    let n = graph.node_count();
    edges
        .iter()
        .map(|&(src, dst)| {
            if src >= n {
                return Err(Error::NodeOutOfRange { node: src, n });
            }
            if dst >= n {
                return Err(Error::NodeOutOfRange { node: dst, n });
            }
            if src == t {
                return Err(Error::BadObservation {
                    reason: format!("observed edge leaves the target node {t}"),
                });
            }
            let e = graph.edge_index(src, dst).ok_or(Error::BadObservation {
                reason: format!("observed edge ({src}, {dst}) is not in the graph"),
            })?;
            Ok((src, e))
        })
        .collect()
}

/// Divides the vector by its maximum and tracks the log offset; false
/// means the vector is identically zero.
fn rescale(vec: &mut DVector<f64>, ln_off: &mut f64) -> bool {
    let mx = vec.max();
    if mx <= 0.0 {
        return false;
    }
    *vec /= mx;
    *ln_off += mx.ln();
    true
}

/// Log-likelihood of an ordered edge sequence under the per-step coin-flip
/// observation model. Evaluated in closed form: the geometric size prior
/// turns the series into one block linear system, solved lane by lane by
/// back-substitution through the shared absorbed factorization, with the
/// conditioning prefactor applied exactly as stated by the model.
pub fn binomial_multi_edge_log_likelihood(
    ctx: &RspContext,
    model: &BinomialObservationModel,
    s: usize,
    t: usize,
    edges: &[(usize, usize)],
) -> Result<f64> {
    let graph = ctx.graph();
    let w = ctx.likelihood_weights();
    let lnz = ln_partition_checked(ctx, s, t)?;
    let resolved = resolve_edges(graph, t, edges)?;
    let n = graph.node_count();
    let m_len = edges.len();
    let q = model.q_mu();

    let qw: Vec<f64> = w.iter().map(|v| q * v).collect();
    let lu = AbsorbedLu::new(graph, &qw, t);
    let mut e_t = DVector::<f64>::zeros(n);
    e_t[t] = 1.0;
    // Last lane: resolvent column of the target. Earlier lanes chain
    // through each observed edge in reverse.
    let mut vec = lu.solve(&e_t)?.map(|v: f64| v.max(0.0));
    let mut ln_off = 0.0;
    if !rescale(&mut vec, &mut ln_off) {
        return Ok(f64::NEG_INFINITY);
    }
    for &(src, e) in resolved.iter().rev() {
        let dst = graph.col[e] as usize;
        let mut rhs = DVector::<f64>::zeros(n);
        rhs[src] = q * w[e] * vec[dst];
        vec = lu.solve(&rhs)?.map(|v: f64| v.max(0.0));
        if !rescale(&mut vec, &mut ln_off) {
            return Ok(f64::NEG_INFINITY);
        }
    }
    if vec[s] <= 0.0 {
        return Ok(f64::NEG_INFINITY);
    }
    let m = m_len as f64;
    // ln of p^M / (q^M (1 − q^M)).
    let ln_pref = m * (model.p_mu().ln() - q.ln()) - (-(m * q.ln()).exp()).ln_1p();
    Ok(ln_pref + vec[s].ln() + ln_off - lnz)
}

/// Which law applies to edge-sequence observations in a data set.
#[derive(Debug, Clone, Copy, Default)]
pub enum EdgeSequenceModel {
    /// Uniform subsample-size prior.
    #[default]
    Uniform,
    /// Per-step coin-flip retention.
    Binomial(BinomialObservationModel),
}

/// Controls for the incomplete-data estimators.
#[derive(Debug, Clone)]
pub struct IncompleteOptions {
    pub series: SeriesConfig,
    pub edge_model: EdgeSequenceModel,
    /// Points in the coarse log-spaced β scan.
    pub grid_points: usize,
    /// Golden-section stopping width on ln β.
    pub rel_tol: f64,
}

impl Default for IncompleteOptions {
    fn default() -> Self {
        Self {
            series: SeriesConfig::default(),
            edge_model: EdgeSequenceModel::Uniform,
            grid_points: 13,
            rel_tol: 1e-4,
        }
    }
}

impl IncompleteOptions {
    fn validate(&self) -> Result<()> {
        if self.grid_points < 3 {
            return Err(Error::BadParameter {
                what: format!("grid needs at least 3 points, got {}", self.grid_points),
            });
        }
        if !(self.rel_tol > 0.0 && self.rel_tol < 1.0) {
            return Err(Error::BadParameter {
                what: format!("search tolerance must be in (0, 1), got {}", self.rel_tol),
            });
        }
        Ok(())
    }
}

/// Joint log-likelihood of a mixed observation set at one β: complete
/// walks score log weight minus log partition value, node sequences the
/// interior-subsequence law, edge sequences the edge-subsequence law (or
/// the coin-flip law when that model is selected). Impossible
/// observations drive the total to −∞.
pub fn log_likelihood_incomplete(graph: &Graph, beta: f64, set: &TrajectorySet) -> Result<f64> {
    log_likelihood_incomplete_with(graph, beta, set, &IncompleteOptions::default())
}

pub fn log_likelihood_incomplete_with(
    graph: &Graph,
    beta: f64,
    set: &TrajectorySet,
    opts: &IncompleteOptions,
) -> Result<f64> {
    if set.is_empty() {
        return Err(Error::EmptySet);
    }
    opts.validate()?;
    let ctx = RspContext::new(graph, beta)?;
    // Incomplete observations sharing a target share one factorization.
    let needs_lu = |obs: &Observation| match (&obs.kind, &opts.edge_model) {
        (ObservationKind::Complete(_), _) => false,
        (ObservationKind::Edges(_), EdgeSequenceModel::Binomial(_)) => false,
        _ => true,
    };
    let mut lus: HashMap<usize, AbsorbedLu> = HashMap::new();
    for obs in &set.observations {
        if needs_lu(obs) && !lus.contains_key(&obs.t) {
            lus.insert(obs.t, AbsorbedLu::new(graph, ctx.likelihood_weights(), obs.t));
        }
    }
    let terms = set
        .observations
        .par_iter()
        .map(|obs| match &obs.kind {
            ObservationKind::Complete(nodes) => {
                if nodes.first() != Some(&obs.s) || nodes.last() != Some(&obs.t) {
                    return Err(Error::BadObservation {
                        reason: "complete walk disagrees with its recorded endpoints".into(),
                    });
                }
                Trajectory::from_nodes(graph, nodes.clone())?;
                complete_observation_log_likelihood(&ctx, nodes)
            }
            ObservationKind::Nodes(nodes) => {
                multi_node_with(&ctx, obs.s, obs.t, nodes, &opts.series, &lus[&obs.t])
            }
            ObservationKind::Edges(edges) => match &opts.edge_model {
                EdgeSequenceModel::Uniform => {
                    multi_edge_with(&ctx, obs.s, obs.t, edges, &opts.series, &lus[&obs.t])
                }
                EdgeSequenceModel::Binomial(model) => {
                    binomial_multi_edge_log_likelihood(&ctx, model, obs.s, obs.t, edges)
                }
            },
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(terms.into_iter().sum())
}

/// Maximum-likelihood β for a mixed observation set: a coarse log-spaced
/// scan of the bracket picks the region, then golden-section refinement
/// on ln β pins the maximum. A maximum on the bracket edge is reported as
/// a boundary status rather than refined.
pub fn mle_beta_incomplete(
    graph: &Graph,
    set: &TrajectorySet,
    bracket: (f64, f64),
    opts: &IncompleteOptions,
) -> Result<MleResult> {
    let (lo, hi) = bracket;
    if !(lo > 0.0 && hi > lo && hi.is_finite()) {
        return Err(Error::InvalidBracket { lo, hi });
    }
    opts.validate()?;
    let mut evaluations = 0usize;
    let mut eval = |beta: f64| -> Result<f64> {
        evaluations += 1;
        log_likelihood_incomplete_with(graph, beta, set, opts)
    };
    let (ln_lo, ln_hi) = (lo.ln(), hi.ln());
    let g = opts.grid_points;
    let mut grid = Vec::with_capacity(g);
    for i in 0..g {
        let beta = if i == 0 {
            lo
        } else if i == g - 1 {
            hi
        } else {
            (ln_lo + (ln_hi - ln_lo) * i as f64 / (g - 1) as f64).exp()
        };
        grid.push((beta, eval(beta)?));
    }
    if grid.iter().all(|&(_, v)| v == f64::NEG_INFINITY) {
        return Err(Error::AllImpossible);
    }
    let best = (0..g).max_by(|&a, &b| grid[a].1.total_cmp(&grid[b].1)).expect("non-empty");
    if best == 0 || best == g - 1 {
        let status = if best == 0 { MleStatus::BoundaryLo } else { MleStatus::BoundaryHi };
        return Ok(MleResult {
            beta_hat: grid[best].0,
            log_likelihood: grid[best].1,
            status,
            bracket,
            evaluations,
        });
    }
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut a = grid[best - 1].0.ln();
    let mut b = grid[best + 1].0.ln();
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = eval(x1.exp())?;
    let mut f2 = eval(x2.exp())?;
    for _ in 0..300 {
        if b - a <= opts.rel_tol {
            break;
        }
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = eval(x2.exp())?;
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = eval(x1.exp())?;
        }
    }
    let (ln_best, value) = if f1 >= f2 { (x1, f1) } else { (x2, f2) };
    Ok(MleResult {
        beta_hat: ln_best.exp(),
        log_likelihood: value,
        status: MleStatus::Converged,
        bracket,
        evaluations,
    })
}

/// Log-likelihood of the set at each β of a grid, as (β, value) rows.
pub fn likelihood_curve(
    graph: &Graph,
    set: &TrajectorySet,
    betas: &[f64],
) -> Result<Vec<(f64, f64)>> {
    likelihood_curve_with(graph, set, betas, &IncompleteOptions::default())
}

pub fn likelihood_curve_with(
    graph: &Graph,
    set: &TrajectorySet,
    betas: &[f64],
    opts: &IncompleteOptions,
) -> Result<Vec<(f64, f64)>> {
    if betas.is_empty() {
        return Err(Error::BadParameter { what: "empty beta grid".into() });
    }
    betas
        .iter()
        .map(|&beta| Ok((beta, log_likelihood_incomplete_with(graph, beta, set, opts)?)))
        .collect()
}
