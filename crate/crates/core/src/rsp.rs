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

//! Path-distribution machinery over a weighted digraph at a fixed inverse
//! temperature.
//!
//! A context pairs a graph with β > 0 and exposes the quantities induced by
//! weighting every source-target path by its reference random-walk
//! probability times exp(−β · cost): partition functions, expected costs,
//! expected edge traversals and node visits, the target-biased transition
//! rule, and the divergence from the reference walk.
//!
//! Per-target linear solves are memoized behind a thread-safe cache so that
//! estimation loops can query many sources against one target cheaply.
//! Systems are solved dense, which is intended for graphs up to a few
//! thousand nodes.

use std::collections::HashMap;
use std::sync::{Arc, OnceLock, RwLock};

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::graph::Graph;

const BETA_BRACKET_LO: f64 = 1e-12;
const BETA_BRACKET_HI: f64 = 1e6;

/// Partition values below this are treated as underflowed; the
/// potential-shifted route takes over.
pub(crate) const Z_FLOOR: f64 = 1e-250;

/// Edge likelihood weights as a dense matrix: entry (i, j) is
/// p_ij · exp(−β · c_ij) on edges and zero elsewhere.
pub fn likelihood_matrix(graph: &Graph, beta: f64) -> Result<DMatrix<f64>> {
    let weights = edge_likelihood_weights(graph, beta)?;
    let n = graph.node_count();
    let mut w = DMatrix::<f64>::zeros(n, n);
    for (e, (i, j, _, _)) in graph.edges().enumerate() {
        w[(i, j)] = weights[e];
    }
    Ok(w)
}

/// Edge-aligned likelihood weights w_ij = p_ij · exp(−β · c_ij).
pub(crate) fn edge_likelihood_weights(graph: &Graph, beta: f64) -> Result<Vec<f64>> {
    if !(beta > 0.0) || !beta.is_finite() {
        return Err(Error::BetaNotPositive { beta });
    }
    let probs = graph.transition_probs()?;
    Ok(probs
        .iter()
        .zip(&graph.cost)
        .map(|(p, c)| p * (-beta * c).exp())
        .collect())
}

/// I − W with row `t` of W zeroed, assembled dense. Row `t` of the result
/// is the identity row, so solving against e_t pins the target entry to
/// one.
pub(crate) fn absorbed_matrix(graph: &Graph, weights: &[f64], t: usize) -> DMatrix<f64> {
    let n = graph.node_count();
    let mut a = DMatrix::<f64>::identity(n, n);
    for i in 0..n {
        if i == t {
            continue;
        }
        for e in graph.row_ptr[i]..graph.row_ptr[i + 1] {
            a[(i, graph.col[e] as usize)] -= weights[e];
        }
    }
    a
}

/// Everything computed for one source-target pair in a single call.
#[derive(Debug, Clone)]
pub struct PairQuantities {
    pub s: usize,
    pub t: usize,
    /// Sum of path likelihood weights over all hitting s-t paths; in (0, 1].
    pub partition: f64,
    pub log_partition: f64,
    /// Likelihood-weighted mean path cost.
    pub expected_cost: f64,
    /// Expected traversal count per edge, in edge-array order.
    pub edge_traversals: Option<Vec<f64>>,
    /// Expected visit count per node (zero at the target).
    pub node_visits: Option<Vec<f64>>,
}

/// Transition rule of the walk conditioned on eventually hitting `t`,
/// stored per edge in edge-array order. Rows of nodes that cannot reach
/// `t` carry no probability and are flagged unreachable; row `t` is zero.
#[derive(Debug, Clone)]
pub struct BiasedTransitions {
    pub t: usize,
    /// Per-edge transition probability; rows of reachable nodes other than
    /// `t` sum to one.
    pub probs: Vec<f64>,
    /// Whether each node can reach `t` (true at `t` itself).
    pub reachable: Vec<bool>,
}

impl BiasedTransitions {
    pub fn is_reachable(&self, node: usize) -> bool {
        self.reachable[node]
    }
}

/// Result of inverting the divergence-versus-β curve.
#[derive(Debug, Clone, Copy)]
pub struct RelativeEntropyInversion {
    pub beta: f64,
    /// Divergence attained at `beta`.
    pub j: f64,
    /// True when the requested divergence sits at or below the value at the
    /// smallest β probed, so only the bracket edge can be reported.
    pub at_lower_edge: bool,
}

pub(crate) struct TargetCache {
    /// Absorbed path-weight sums: x[i] is the total likelihood weight of
    /// hitting paths from i to the target (x[target] = 1).
    pub(crate) x: DVector<f64>,
    /// Cost-weighted companion: expected cost from i is u[i] / x[i].
    pub(crate) u: DVector<f64>,
    biased: OnceLock<Arc<BiasedTransitions>>,
}

/// Per-target pair statistics computed with each edge weight multiplied
/// by e^{β(φ(i) − φ(j))}, φ the min-cost potential toward the target.
/// The shift cancels the dominant e^{−βc} decay, so the solves stay in
/// floating-point range at any β; values agree with the plain route
/// wherever both are representable.
pub(crate) struct ShiftedTarget {
    pub(crate) ln_z: Vec<f64>,
    /// Expected path cost per source; NaN where the target is unreachable.
    pub(crate) expected_cost: Vec<f64>,
}

pub(crate) fn shifted_target(graph: &Graph, beta: f64, t: usize) -> Result<ShiftedTarget> {
    let n = graph.node_count();
    let probs = graph.transition_probs()?;
    let phi = graph.min_cost_to_target(t)?;
    // Shifted weight of edge e out of i; zero when either end cannot
    // reach the target. The exponent is ≤ 0 by potential optimality.
    let shifted_weight = |i: usize, e: usize, j: usize, cost: f64| -> f64 {
        let slack = cost + (if j == t { 0.0 } else { phi[j] }) - phi[i];
        if !slack.is_finite() {
            return 0.0;
        }
        probs[e] * (-beta * slack).exp()
    };
    let mut a = DMatrix::<f64>::identity(n, n);
    let mut rhs = DVector::<f64>::zeros(n);
    for i in 0..n {
        if i == t || !phi[i].is_finite() {
            continue;
        }
        for (e, j, _, cost) in graph.out_edges(i) {
            let w = shifted_weight(i, e, j, cost);
            if j == t {
                rhs[i] += w;
            } else {
                a[(i, j)] -= w;
            }
        }
    }
    let lu = a.lu();
    let mut x = lu
        .solve(&rhs)
        .ok_or(Error::SingularSystem { what: "shifted path-weight system" })?;
    x.iter_mut().for_each(|v| *v = v.max(0.0));
    let mut b = DVector::<f64>::zeros(n);
    for i in 0..n {
        if i == t || !phi[i].is_finite() {
            continue;
        }
        for (e, j, _, cost) in graph.out_edges(i) {
            let chi = if j == t { 1.0 } else { x[j] };
            b[i] += shifted_weight(i, e, j, cost) * cost * chi;
        }
    }
    let mut u = lu
        .solve(&b)
        .ok_or(Error::SingularSystem { what: "shifted path-cost system" })?;
    u.iter_mut().for_each(|v| *v = v.max(0.0));
    let mut ln_z = vec![f64::NEG_INFINITY; n];
    let mut expected_cost = vec![f64::NAN; n];
    for s in 0..n {
        if s != t && x[s] > 0.0 {
            ln_z[s] = x[s].ln() - beta * phi[s];
            expected_cost[s] = u[s] / x[s];
        }
    }
    Ok(ShiftedTarget { ln_z, expected_cost })
}

/// A graph plus a fixed inverse temperature β, with memoized per-target
/// solves and a lazily built dense fundamental matrix.
///
/// Immutable after construction except for its internal caches, which are
/// safe to populate from concurrent readers.
pub struct RspContext {
    graph: Graph,
    beta: f64,
    weights: Vec<f64>,
    probs: OnceLock<Vec<f64>>,
    targets: RwLock<HashMap<usize, Arc<TargetCache>>>,
    shifted: RwLock<HashMap<usize, Arc<ShiftedTarget>>>,
    z: OnceLock<DMatrix<f64>>,
    f: OnceLock<DMatrix<f64>>,
}

impl RspContext {
    pub fn new(graph: &Graph, beta: f64) -> Result<Self> {
        let weights = edge_likelihood_weights(graph, beta)?;
        Ok(Self {
            graph: graph.clone(),
            beta,
            weights,
            probs: OnceLock::new(),
            targets: RwLock::new(HashMap::new()),
            shifted: RwLock::new(HashMap::new()),
            z: OnceLock::new(),
            f: OnceLock::new(),
        })
    }

    /// Reference-walk transition probabilities, computed once.
    fn transition_probs_cached(&self) -> Result<&[f64]> {
        if self.probs.get().is_none() {
            let p = self.graph.transition_probs()?;
            let _ = self.probs.set(p);
        }
        Ok(self.probs.get().expect("set above").as_slice())
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// Edge-aligned likelihood weights.
    pub fn likelihood_weights(&self) -> &[f64] {
        &self.weights
    }

    fn check_node(&self, node: usize) -> Result<()> {
        let n = self.graph.node_count();
        if node >= n {
            return Err(Error::NodeOutOfRange { node, n });
        }
        Ok(())
    }

    fn check_pair(&self, s: usize, t: usize) -> Result<()> {
        self.check_node(s)?;
        self.check_node(t)?;
        if s == t {
            return Err(Error::SameEndpoints { node: s });
        }
        Ok(())
    }

    fn absorbed_system(&self, t: usize) -> DMatrix<f64> {
        absorbed_matrix(&self.graph, &self.weights, t)
    }

    /// Memoized per-target solve. Holds the write lock during computation
    /// so each target is initialized exactly once.
    pub(crate) fn target(&self, t: usize) -> Result<Arc<TargetCache>> {
        self.check_node(t)?;
        if let Some(cache) = self.targets.read().expect("cache lock").get(&t) {
            return Ok(Arc::clone(cache));
        }
        let mut map = self.targets.write().expect("cache lock");
        if let Some(cache) = map.get(&t) {
            return Ok(Arc::clone(cache));
        }
        let n = self.graph.node_count();
        let lu = self.absorbed_system(t).lu();
        let mut e_t = DVector::<f64>::zeros(n);
        e_t[t] = 1.0;
        let x = lu
            .solve(&e_t)
            .ok_or(Error::SingularSystem { what: "absorbed path-weight system" })?
            .map(|v| v.max(0.0));
        // Right-hand side for the cost companion: row sums of
        // (absorbed W ∘ C) scaled by x at the edge head.
        let mut rhs = DVector::<f64>::zeros(n);
        for i in 0..n {
            if i == t {
                continue;
            }
            for e in self.graph.row_ptr[i]..self.graph.row_ptr[i + 1] {
                rhs[i] += self.weights[e] * self.graph.cost[e] * x[self.graph.col[e] as usize];
            }
        }
        let u = lu
            .solve(&rhs)
            .ok_or(Error::SingularSystem { what: "absorbed path-cost system" })?
            .map(|v| v.max(0.0));
        let cache = Arc::new(TargetCache {
            x,
            u,
            biased: OnceLock::new(),
        });
        map.insert(t, Arc::clone(&cache));
        Ok(cache)
    }

    /// Memoized potential-shifted per-target solve, used when the plain
    /// route underflows.
    pub(crate) fn shifted(&self, t: usize) -> Result<Arc<ShiftedTarget>> {
        self.check_node(t)?;
        if let Some(cache) = self.shifted.read().expect("cache lock").get(&t) {
            return Ok(Arc::clone(cache));
        }
        let mut map = self.shifted.write().expect("cache lock");
        if let Some(cache) = map.get(&t) {
            return Ok(Arc::clone(cache));
        }
        let cache = Arc::new(shifted_target(&self.graph, self.beta, t)?);
        map.insert(t, Arc::clone(&cache));
        Ok(cache)
    }

    /// Row `s` of the inverse absorbed system: entry i is the expected
    /// number of times the walk started at `s` occupies i before hitting
    /// the target, per unit of (unnormalized) path weight.
    fn visit_row(&self, t: usize, s: usize) -> Result<DVector<f64>> {
        let n = self.graph.node_count();
        let lu = self.absorbed_system(t).transpose().lu();
        let mut e_s = DVector::<f64>::zeros(n);
        e_s[s] = 1.0;
        lu.solve(&e_s)
            .map(|y| y.map(|v| v.max(0.0)))
            .ok_or(Error::SingularSystem { what: "absorbed visit system" })
    }

    /// Total likelihood weight of all hitting s-t paths. Zero (not an
    /// error) when t is unreachable from s, so batch callers can flag and
    /// continue.
    pub fn partition_function(&self, s: usize, t: usize) -> Result<f64> {
        self.check_pair(s, t)?;
        Ok(self.target(t)?.x[s])
    }

    /// Log of `partition_function`; −∞ flags an unreachable pair. A plain
    /// value small enough to be underflow is recomputed through the
    /// potential-shifted route, so the result stays finite for reachable
    /// pairs at any β.
    pub fn log_partition_function(&self, s: usize, t: usize) -> Result<f64> {
        let z = self.partition_function(s, t)?;
        if z >= Z_FLOOR {
            return Ok(z.ln());
        }
        Ok(self.shifted(t)?.ln_z[s])
    }

    /// Dense fundamental matrix (I − W)^{-1}, built once on demand.
    pub(crate) fn dense_z(&self) -> Result<&DMatrix<f64>> {
        if let Some(z) = self.z.get() {
            return Ok(z);
        }
        let n = self.graph.node_count();
        let mut a = DMatrix::<f64>::identity(n, n);
        for (e, (i, j, _, _)) in self.graph.edges().enumerate() {
            a[(i, j)] -= self.weights[e];
        }
        let z = a
            .try_inverse()
            .ok_or(Error::SingularSystem { what: "fundamental matrix" })?;
        Ok(self.z.get_or_init(|| z))
    }

    /// Dense cost-weighted companion Z·(W ∘ C)·Z, the negative β-derivative
    /// of the fundamental matrix.
    pub(crate) fn dense_f(&self) -> Result<&DMatrix<f64>> {
        if let Some(f) = self.f.get() {
            return Ok(f);
        }
        let z = self.dense_z()?;
        let n = self.graph.node_count();
        let mut wc = DMatrix::<f64>::zeros(n, n);
        for (e, (i, j, _, c)) in self.graph.edges().enumerate() {
            wc[(i, j)] = self.weights[e] * c;
        }
        let f = z * wc * z;
        Ok(self.f.get_or_init(|| f))
    }

    /// All-pairs partition values via the fundamental-matrix route:
    /// entry (s, t) is z_st / z_tt, with a zero diagonal. Agrees with
    /// `partition_function` entrywise and serves as its cross-check.
    pub fn hitting_partition_matrix(&self) -> Result<DMatrix<f64>> {
        let z = self.dense_z()?;
        let n = self.graph.node_count();
        let mut out = DMatrix::<f64>::zeros(n, n);
        for t in 0..n {
            let diag = z[(t, t)];
            for s in 0..n {
                if s != t {
                    out[(s, t)] = (z[(s, t)] / diag).max(0.0);
                }
            }
        }
        Ok(out)
    }

    /// Likelihood-weighted mean cost of the hitting s-t paths. Underflowed
    /// pairs fall back to the potential-shifted route; genuinely
    /// unreachable pairs are an error.
    pub fn expected_cost(&self, s: usize, t: usize) -> Result<f64> {
        self.check_pair(s, t)?;
        let cache = self.target(t)?;
        if cache.x[s] >= Z_FLOOR {
            return Ok(cache.u[s] / cache.x[s]);
        }
        let c = self.shifted(t)?.expected_cost[s];
        if !c.is_finite() {
            return Err(Error::Unreachable { s, t });
        }
        Ok(c)
    }

    /// All-pairs expected costs from the dense route; NaN on the diagonal
    /// and for unreachable pairs.
    pub fn expected_cost_matrix(&self) -> Result<DMatrix<f64>> {
        let z = self.dense_z()?;
        let f = self.dense_f()?;
        let n = self.graph.node_count();
        let mut out = DMatrix::<f64>::from_element(n, n, f64::NAN);
        for t in 0..n {
            let corr = f[(t, t)] / z[(t, t)];
            for s in 0..n {
                if s != t && z[(s, t)] > 0.0 {
                    out[(s, t)] = f[(s, t)] / z[(s, t)] - corr;
                }
            }
        }
        Ok(out)
    }

    /// Expected number of traversals of every edge by the s-t path
    /// distribution, in edge-array order.
    pub fn expected_edge_traversals(&self, s: usize, t: usize) -> Result<Vec<f64>> {
        self.check_pair(s, t)?;
        let cache = self.target(t)?;
        if cache.x[s] <= 0.0 {
            return Err(Error::Unreachable { s, t });
        }
        let y = self.visit_row(t, s)?;
        let mut out = vec![0.0; self.graph.edge_count()];
        for i in 0..self.graph.node_count() {
            if i == t {
                continue;
            }
            for e in self.graph.row_ptr[i]..self.graph.row_ptr[i + 1] {
                let j = self.graph.col[e] as usize;
                out[e] = (y[i] * self.weights[e] * cache.x[j] / cache.x[s]).max(0.0);
            }
        }
        Ok(out)
    }

    /// Expected number of visits to every node by the s-t path
    /// distribution; a visit is counted when the walk occupies a node and
    /// then leaves it, so the target scores zero.
    pub fn expected_node_visits(&self, s: usize, t: usize) -> Result<Vec<f64>> {
        self.check_pair(s, t)?;
        let cache = self.target(t)?;
        if cache.x[s] <= 0.0 {
            return Err(Error::Unreachable { s, t });
        }
        let y = self.visit_row(t, s)?;
        let mut out = vec![0.0; self.graph.node_count()];
        for i in 0..self.graph.node_count() {
            if i != t {
                out[i] = (y[i] * cache.x[i] / cache.x[s]).max(0.0);
            }
        }
        Ok(out)
    }

    /// Sum of expected node visits over a set of source-target pairs.
    /// Pairs are grouped by target so each target is factorized once.
    pub fn rsp_betweenness(&self, pairs: &[(usize, usize)]) -> Result<Vec<f64>> {
        if pairs.is_empty() {
            return Err(Error::EmptySet);
        }
        let n = self.graph.node_count();
        let mut by_target: HashMap<usize, Vec<usize>> = HashMap::new();
        for &(s, t) in pairs {
            self.check_pair(s, t)?;
            by_target.entry(t).or_default().push(s);
        }
        let mut out = vec![0.0; n];
        for (t, sources) in by_target {
            let cache = self.target(t)?;
            let lu = self.absorbed_system(t).transpose().lu();
            for s in sources {
                if cache.x[s] <= 0.0 {
                    return Err(Error::Unreachable { s, t });
                }
                let mut e_s = DVector::<f64>::zeros(n);
                e_s[s] = 1.0;
                let y = lu
                    .solve(&e_s)
                    .ok_or(Error::SingularSystem { what: "absorbed visit system" })?;
                for i in 0..n {
                    if i != t {
                        out[i] += (y[i] * cache.x[i] / cache.x[s]).max(0.0);
                    }
                }
            }
        }
        Ok(out)
    }

    /// Partition value, expected cost, and optionally the flow quantities
    /// for one pair.
    pub fn pair_quantities(&self, s: usize, t: usize, with_flows: bool) -> Result<PairQuantities> {
        let partition = self.partition_function(s, t)?;
        if partition <= 0.0 {
            return Err(Error::Unreachable { s, t });
        }
        let expected_cost = self.expected_cost(s, t)?;
        let (edge_traversals, node_visits) = if with_flows {
            (
                Some(self.expected_edge_traversals(s, t)?),
                Some(self.expected_node_visits(s, t)?),
            )
        } else {
            (None, None)
        };
        Ok(PairQuantities {
            s,
            t,
            partition,
            log_partition: partition.ln(),
            expected_cost,
            edge_traversals,
            node_visits,
        })
    }

    /// Transition rule of the walk conditioned on hitting `t`, cached per
    /// target. Independent of the source.
    pub fn biased_transitions(&self, t: usize) -> Result<Arc<BiasedTransitions>> {
        let cache = self.target(t)?;
        if let Some(b) = cache.biased.get() {
            return Ok(Arc::clone(b));
        }
        let n = self.graph.node_count();
        let mut probs = vec![0.0; self.graph.edge_count()];
        let mut reachable = vec![false; n];
        reachable[t] = true;
        for i in 0..n {
            if i == t {
                continue;
            }
            if cache.x[i] <= 0.0 {
                continue;
            }
            reachable[i] = true;
            for e in self.graph.row_ptr[i]..self.graph.row_ptr[i + 1] {
                let j = self.graph.col[e] as usize;
                probs[e] = self.weights[e] * cache.x[j] / cache.x[i];
            }
        }
        let built = Arc::new(BiasedTransitions { t, probs, reachable });
        Ok(Arc::clone(cache.biased.get_or_init(|| built)))
    }

    /// Log likelihood weight of one explicit node sequence under the edge
    /// weights of this context, accumulated per edge as ln p − β·c so
    /// large β cannot underflow the per-edge factors.
    pub fn trajectory_log_weight(&self, nodes: &[usize]) -> Result<f64> {
        if nodes.len() < 2 {
            return Err(Error::BadTrajectory {
                reason: "a trajectory needs at least two nodes".into(),
            });
        }
        let probs = self.transition_probs_cached()?;
        let mut total = 0.0;
        for pair in nodes.windows(2) {
            let e = self.graph.edge_index(pair[0], pair[1]).ok_or_else(|| {
                Error::BadTrajectory {
                    reason: format!("no edge from {} to {}", pair[0], pair[1]),
                }
            })?;
            total += probs[e].ln() - self.beta * self.graph.cost[e];
        }
        Ok(total)
    }

    /// Total cost of one explicit node sequence.
    pub fn trajectory_cost(&self, nodes: &[usize]) -> Result<f64> {
        if nodes.len() < 2 {
            return Err(Error::BadTrajectory {
                reason: "a trajectory needs at least two nodes".into(),
            });
        }
        let mut total = 0.0;
        for pair in nodes.windows(2) {
            let e = self.graph.edge_index(pair[0], pair[1]).ok_or_else(|| {
                Error::BadTrajectory {
                    reason: format!("no edge from {} to {}", pair[0], pair[1]),
                }
            })?;
            total += self.graph.cost[e];
        }
        Ok(total)
    }

    /// Divergence of the s-t path distribution from the reference random
    /// walk: −β·⟨cost⟩ − log(partition). Nonnegative; zero when the path
    /// distribution coincides with the reference walk's.
    pub fn relative_entropy(&self, s: usize, t: usize) -> Result<f64> {
        let cost = self.expected_cost(s, t)?;
        let log_z = self.log_partition_function(s, t)?;
        Ok((-self.beta * cost - log_z).max(0.0))
    }
}

/// Finds β whose s-t path distribution sits at divergence `j0` from the
/// reference walk, by bisection on log β over [1e-12, 1e6]. The divergence
/// is nondecreasing in β, zero in the small-β limit.
pub fn beta_for_relative_entropy(
    graph: &Graph,
    s: usize,
    t: usize,
    j0: f64,
) -> Result<RelativeEntropyInversion> {
    if !(j0 >= 0.0) || !j0.is_finite() {
        return Err(Error::BadParameter {
            what: format!("requested divergence must be finite and nonnegative, got {j0}"),
        });
    }
    let eval = |beta: f64| -> Result<f64> {
        RspContext::new(graph, beta)?.relative_entropy(s, t)
    };
    let mut lo = BETA_BRACKET_LO;
    let mut hi = BETA_BRACKET_HI;
    let j_lo = eval(lo)?;
    if j0 <= j_lo {
        return Ok(RelativeEntropyInversion {
            beta: lo,
            j: j_lo,
            at_lower_edge: true,
        });
    }
    // Path weights underflow at extreme β, which masquerades as
    // unreachability; back the upper edge off to representable territory.
    let j_hi = loop {
        match eval(hi) {
            Ok(j) => break j,
            Err(Error::Unreachable { .. }) if hi > lo * 10.0 => hi /= 10.0,
            Err(e) => return Err(e),
        }
    };
    if j0 > j_hi {
        return Err(Error::BracketFailure {
            requested: j0,
            attained: j_hi,
        });
    }
    let mut beta = hi;
    let mut j = j_hi;
    for _ in 0..200 {
        beta = (lo.ln() + hi.ln()).mul_add(0.5, 0.0).exp();
        j = eval(beta)?;
        if (j - j0).abs() < 1e-8 {
            return Ok(RelativeEntropyInversion {
                beta,
                j,
                at_lower_edge: false,
            });
        }
        if j < j0 {
            lo = beta;
        } else {
            hi = beta;
        }
    }
    Ok(RelativeEntropyInversion {
        beta,
        j,
        at_lower_edge: false,
    })
}
