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

//! Inverse-temperature estimation from fully observed walks.
//!
//! The log-likelihood of a set of complete walks decomposes per walk into
//! its log path weight minus the log partition value of its endpoint
//! pair. Its β-stationarity condition equates the model's expected path
//! cost, summed over observed pairs with multiplicity, with the total
//! observed cost; since expected cost is non-increasing in β, the match
//! is found by bisection. An experimental edge-cost gradient ascent (at
//! unit β) is included as well.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::rsp::{RspContext, Z_FLOOR};
use crate::sampler::{ObservationKind, Trajectory, TrajectorySet};

/// Default search bracket for β.
pub const DEFAULT_BRACKET: (f64, f64) = (1e-6, 1e3);
/// Default relative tolerance on the stationarity residual.
pub const DEFAULT_MLE_TOL: f64 = 1e-6;

/// How a β search ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MleStatus {
    Converged,
    /// The optimum sits at or below the lower bracket end.
    BoundaryLo,
    /// The optimum sits at or above the upper bracket end.
    BoundaryHi,
}

/// Result of a β search.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MleResult {
    pub beta_hat: f64,
    pub log_likelihood: f64,
    pub status: MleStatus,
    pub bracket: (f64, f64),
    /// Number of likelihood-system evaluations performed.
    pub evaluations: usize,
}

/// Aggregates of a complete-walk data set.
struct CompleteData {
    pair_counts: HashMap<(usize, usize), usize>,
    total_cost: f64,
    edge_counts: Vec<f64>,
}

fn collect_complete(graph: &Graph, set: &TrajectorySet) -> Result<CompleteData> {
    if set.is_empty() {
        return Err(Error::EmptySet);
    }
    let mut pair_counts = HashMap::new();
    let mut total_cost = 0.0;
    let mut edge_counts = vec![0.0; graph.edge_count()];
    for obs in &set.observations {
        let ObservationKind::Complete(nodes) = &obs.kind else {
            return Err(Error::BadObservation {
                reason: "expected a complete walk".into(),
            });
        };
        let traj = Trajectory::from_nodes(graph, nodes.clone())?;
        total_cost += traj.cost(graph)?;
        for (e, c) in traj.edge_counts(graph)?.into_iter().enumerate() {
            edge_counts[e] += c as f64;
        }
        *pair_counts.entry((obs.s, obs.t)).or_insert(0) += 1;
    }
    Ok(CompleteData { pair_counts, total_cost, edge_counts })
}

/// Log-likelihood of one complete walk under an existing context: log
/// path weight minus log partition value; −∞ when the pair's endpoint
/// admits no path.
pub(crate) fn complete_observation_log_likelihood(
    ctx: &RspContext,
    nodes: &[usize],
) -> Result<f64> {
    let s = *nodes.first().ok_or(Error::BadTrajectory {
        reason: "empty walk".into(),
    })?;
    let t = *nodes.last().expect("non-empty");
    let lnz = ctx.log_partition_function(s, t)?;
    if lnz == f64::NEG_INFINITY {
        return Ok(f64::NEG_INFINITY);
    }
    Ok(ctx.trajectory_log_weight(nodes)? - lnz)
}

/// Joint log-likelihood of a set of complete walks at the given β. Walks
/// whose endpoint pair admits no path make the value −∞.
pub fn log_likelihood_complete(graph: &Graph, beta: f64, set: &TrajectorySet) -> Result<f64> {
    if set.is_empty() {
        return Err(Error::EmptySet);
    }
    let ctx = RspContext::new(graph, beta)?;
    let mut total = 0.0;
    for obs in &set.observations {
        let ObservationKind::Complete(nodes) = &obs.kind else {
            return Err(Error::BadObservation {
                reason: "expected a complete walk".into(),
            });
        };
        Trajectory::from_nodes(graph, nodes.clone())?;
        let term = complete_observation_log_likelihood(&ctx, nodes)?;
        if term == f64::NEG_INFINITY {
            return Ok(f64::NEG_INFINITY);
        }
        total += term;
    }
    Ok(total)
}

/// Model expected cost summed over the observed pairs with multiplicity.
fn pooled_expected_cost(
    graph: &Graph,
    beta: f64,
    pair_counts: &HashMap<(usize, usize), usize>,
) -> Result<f64> {
    let ctx = RspContext::new(graph, beta)?;
    let mut total = 0.0;
    let distinct_targets: std::collections::HashSet<usize> =
        pair_counts.keys().map(|&(_, t)| t).collect();
    if distinct_targets.len() >= 8 {
        // Many targets: one dense all-pairs pass beats per-target solves.
        let costs = ctx.expected_cost_matrix()?;
        let z = ctx.dense_z()?;
        for (&(s, t), &k) in pair_counts {
            // Underflowed entries go through the per-pair route, which
            // falls back to the shifted solve on its own.
            let c = if z[(s, t)] >= Z_FLOOR { costs[(s, t)] } else { ctx.expected_cost(s, t)? };
            total += k as f64 * c;
        }
    } else {
        for (&(s, t), &k) in pair_counts {
            total += k as f64 * ctx.expected_cost(s, t)?;
        }
    }
    Ok(total)
}

/// Maximum-likelihood β for a set of complete walks, by bisection on the
/// stationarity residual (pooled expected cost minus observed cost),
/// which is non-increasing in β.
pub fn mle_beta_complete(
    graph: &Graph,
    set: &TrajectorySet,
    bracket: (f64, f64),
    tol: f64,
) -> Result<MleResult> {
    let (lo, hi) = bracket;
    if !(lo > 0.0 && hi > lo && hi.is_finite()) {
        return Err(Error::InvalidBracket { lo, hi });
    }
    if !(tol > 0.0 && tol < 1.0) {
        return Err(Error::BadParameter {
            what: format!("tolerance must be in (0, 1), got {tol}"),
        });
    }
    let data = collect_complete(graph, set)?;
    let thresh = tol * data.total_cost;
    let mut evaluations = 0usize;
    let residual = |beta: f64, evals: &mut usize| -> Result<f64> {
        *evals += 1;
        Ok(pooled_expected_cost(graph, beta, &data.pair_counts)? - data.total_cost)
    };

    let finish = |beta: f64, status: MleStatus, evaluations: usize| -> Result<MleResult> {
        Ok(MleResult {
            beta_hat: beta,
            log_likelihood: log_likelihood_complete(graph, beta, set)?,
            status,
            bracket,
            evaluations,
        })
    };

    let g_lo = residual(lo, &mut evaluations)?;
    if g_lo <= 0.0 {
        // Even the most random walk costs no more than the data: the
        // optimum is at or below the bracket.
        return finish(lo, MleStatus::BoundaryLo, evaluations);
    }
    let g_hi = residual(hi, &mut evaluations)?;
    if g_hi >= 0.0 {
        return finish(hi, MleStatus::BoundaryHi, evaluations);
    }
    let mut ln_lo = lo.ln();
    let mut ln_hi = hi.ln();
    let mut mid = (0.5 * (ln_lo + ln_hi)).exp();
    for _ in 0..100 {
        mid = (0.5 * (ln_lo + ln_hi)).exp();
        let g_mid = residual(mid, &mut evaluations)?;
        if g_mid.abs() <= thresh {
            return finish(mid, MleStatus::Converged, evaluations);
        }
        if g_mid > 0.0 {
            ln_lo = mid.ln();
        } else {
            ln_hi = mid.ln();
        }
        if ln_hi - ln_lo < 1e-12 {
            break;
        }
    }
    finish(mid, MleStatus::Converged, evaluations)
}

/// Gradient of the complete-walk log-likelihood with respect to each edge
/// cost, at unit β: expected traversals under the model (summed over
/// observed pairs) minus observed traversals.
pub fn edge_cost_gradient(graph: &Graph, set: &TrajectorySet) -> Result<Vec<f64>> {
    let data = collect_complete(graph, set)?;
    let ctx = RspContext::new(graph, 1.0)?;
    let mut grad = vec![0.0; graph.edge_count()];
    for (&(s, t), &k) in &data.pair_counts {
        let nbar = ctx.expected_edge_traversals(s, t)?;
        for (g, n) in grad.iter_mut().zip(&nbar) {
            *g += k as f64 * n;
        }
    }
    for (g, observed) in grad.iter_mut().zip(&data.edge_counts) {
        *g -= observed;
    }
    Ok(grad)
}

/// Controls for the experimental edge-cost ascent.
#[derive(Debug, Clone, Copy)]
pub struct EdgeCostOptions {
    /// Initial ascent step.
    pub step: f64,
    /// Stop once the gradient max-norm falls below this.
    pub tol: f64,
    pub max_iterations: usize,
}

impl Default for EdgeCostOptions {
    fn default() -> Self {
        Self { step: 1.0, tol: 1e-8, max_iterations: 1000 }
    }
}

/// Outcome of the experimental edge-cost ascent.
#[derive(Debug, Clone)]
pub struct EdgeCostEstimate {
    /// Estimated costs in edge-array order.
    pub costs: Vec<f64>,
    pub log_likelihood: f64,
    pub iterations: usize,
    /// False when the iteration cap or a line-search stall ended the
    /// ascent before the gradient tolerance was met.
    pub converged: bool,
}

/// Experimental: edge costs fitted by projected gradient ascent at unit
/// β, starting from the graph's current costs. Costs are identifiable
/// only up to the cost-scaling freedom, so compare induced path
/// distributions rather than raw values. The likelihood never decreases
/// across accepted steps.
pub fn mle_edge_costs(
    graph: &Graph,
    set: &TrajectorySet,
    opts: &EdgeCostOptions,
) -> Result<EdgeCostEstimate> {
    if !(opts.step > 0.0) || !(opts.tol > 0.0) || opts.max_iterations == 0 {
        return Err(Error::BadParameter {
            what: "ascent options must be positive".into(),
        });
    }
    let mut current = graph.clone();
    let mut costs = current.cost.clone();
    let mut ll = log_likelihood_complete(&current, 1.0, set)?;
    let mut step = opts.step;
    for iteration in 0..opts.max_iterations {
        let grad = edge_cost_gradient(&current, set)?;
        let gmax = grad.iter().fold(0.0f64, |m, g| m.max(g.abs()));
        if gmax < opts.tol {
            return Ok(EdgeCostEstimate {
                costs,
                log_likelihood: ll,
                iterations: iteration,
                converged: true,
            });
        }
        let mut accepted = false;
        for _ in 0..40 {
            let candidate: Vec<f64> = costs
                .iter()
                .zip(&grad)
                .map(|(c, g)| (c + step * g).max(1e-6))
                .collect();
            let next = current.with_costs(&candidate)?;
            let next_ll = log_likelihood_complete(&next, 1.0, set)?;
            if next_ll >= ll {
                costs = candidate;
                current = next;
                ll = next_ll;
                step *= 1.5;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            return Ok(EdgeCostEstimate {
                costs,
                log_likelihood: ll,
                iterations: iteration + 1,
                converged: false,
            });
        }
    }
    Ok(EdgeCostEstimate {
        costs,
        log_likelihood: ll,
        iterations: opts.max_iterations,
        converged: false,
    })
}
