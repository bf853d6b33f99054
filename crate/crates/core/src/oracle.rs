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

//! Brute-force ground truth on small graphs.
//!
//! Everything here evaluates defining sums directly — path enumeration with
//! explicit weights, observation probabilities as sums over enumerated
//! paths, nodal analysis for resistance, Dijkstra for least cost, a plain
//! absorbing-chain solve for random-walk hitting costs. None of it shares
//! code with the fast solver paths, which is the point: the test suites
//! compare the two against each other.

use std::collections::BinaryHeap;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::graph::Graph;

const DEFAULT_PATH_CAP: usize = 10_000_000;

/// One enumerated hitting path with its likelihood weight (product of edge
/// likelihoods) and cost.
#[derive(Debug, Clone)]
pub struct EnumeratedPath {
    pub nodes: Vec<usize>,
    pub weight: f64,
    pub cost: f64,
}

impl EnumeratedPath {
    /// Number of edges.
    pub fn len(&self) -> usize {
        self.nodes.len() - 1
    }

    /// Always false: a hitting path has at least one edge.
    pub fn is_empty(&self) -> bool {
        false
    }
}

/// Exhaustive-up-to-length-K listing of the hitting paths from s to t.
#[derive(Debug, Clone)]
pub struct PathEnumeration {
    pub s: usize,
    pub t: usize,
    pub max_len: usize,
    pub paths: Vec<EnumeratedPath>,
    /// Geometric bound r^(K+1)/(1−r) on the weight of the omitted paths,
    /// with r the maximum row sum of the target-absorbed likelihood matrix.
    /// Zero when the enumeration is exhaustive.
    pub tail_bound: f64,
    /// True when no path was cut off by the length cap.
    pub exhausted: bool,
}

/// Per-edge likelihood weights w_ij = p_ij · exp(−β·c_ij) in edge-array
/// order, computed directly from the graph.
fn edge_weights(graph: &Graph, beta: f64) -> Result<Vec<f64>> {
    if !(beta > 0.0) {
        return Err(Error::BetaNotPositive { beta });
    }
    let probs = graph.transition_probs()?;
    Ok(probs
        .iter()
        .zip(&graph.cost)
        .map(|(p, c)| p * (-beta * c).exp())
        .collect())
}

fn max_absorbed_row_sum(graph: &Graph, weights: &[f64], t: usize) -> f64 {
    let mut r: f64 = 0.0;
    for i in 0..graph.node_count() {
        if i == t {
            continue;
        }
        let sum: f64 = (graph.row_ptr[i]..graph.row_ptr[i + 1])
            .map(|e| weights[e])
            .sum();
        r = r.max(sum);
    }
    r
}

/// Depth-first enumeration of every hitting s-t path with at most `max_len`
/// edges, recording likelihood weights and costs. Paths whose running
/// weight underflows to zero are pruned; they lie far below any tolerance
/// the tail bound can certify.
pub fn enumerate_hitting_paths(
    graph: &Graph,
    beta: f64,
    s: usize,
    t: usize,
    max_len: usize,
) -> Result<PathEnumeration> {
    enumerate_hitting_paths_capped(graph, beta, s, t, max_len, DEFAULT_PATH_CAP)
}

pub fn enumerate_hitting_paths_capped(
    graph: &Graph,
    beta: f64,
    s: usize,
    t: usize,
    max_len: usize,
    path_cap: usize,
) -> Result<PathEnumeration> {
    let n = graph.node_count();
    if s >= n {
        return Err(Error::NodeOutOfRange { node: s, n });
    }
    if t >= n {
        return Err(Error::NodeOutOfRange { node: t, n });
    }
    if s == t {
        return Err(Error::SameEndpoints { node: s });
    }
    if max_len == 0 {
        return Err(Error::BadParameter {
            what: "max path length must be at least 1".into(),
        });
    }
    let weights = edge_weights(graph, beta)?;
    let mut paths = Vec::new();
    let mut exhausted = true;
    // Backtracking stack: (node, next out-edge offset, weight and cost of
    // the prefix ending at node).
    let mut stack: Vec<(usize, usize, f64, f64)> = vec![(s, 0, 1.0, 0.0)];
    let mut nodes: Vec<usize> = vec![s];
    while let Some(frame) = stack.last_mut() {
        let (node, offset, weight, cost) = *frame;
        let edges_start = graph.row_ptr[node];
        let edges_end = graph.row_ptr[node + 1];
        if edges_start + offset >= edges_end {
            stack.pop();
            nodes.pop();
            continue;
        }
        frame.1 += 1;
        let e = edges_start + offset;
        let j = graph.col[e] as usize;
        let w = weight * weights[e];
        let c = cost + graph.cost[e];
        if w == 0.0 {
            continue;
        }
        if j == t {
            if paths.len() >= path_cap {
                return Err(Error::PathBudget { cap: path_cap });
            }
            let mut full = nodes.clone();
            full.push(t);
            paths.push(EnumeratedPath {
                nodes: full,
                weight: w,
                cost: c,
            });
            continue;
        }
        if nodes.len() > max_len {
            unreachable!("depth guard");
        }
        if nodes.len() == max_len {
            // One more edge would exceed the cap; this branch is truncated.
            exhausted = false;
            continue;
        }
        nodes.push(j);
        stack.push((j, 0, w, c));
    }
    let tail_bound = if exhausted {
        0.0
    } else {
        let r = max_absorbed_row_sum(graph, &weights, t);
        r.powi(max_len as i32 + 1) / (1.0 - r)
    };
    Ok(PathEnumeration {
        s,
        t,
        max_len,
        paths,
        tail_bound,
        exhausted,
    })
}

/// Sum of path weights: the partition function up to the tail bound.
pub fn oracle_partition(en: &PathEnumeration) -> f64 {
    en.paths.iter().map(|p| p.weight).sum()
}

/// Weight-averaged path cost.
pub fn oracle_expected_cost(en: &PathEnumeration) -> f64 {
    let z = oracle_partition(en);
    en.paths.iter().map(|p| p.weight * p.cost).sum::<f64>() / z
}

/// Expected traversal count of every edge, in edge-array order.
pub fn oracle_traversals(graph: &Graph, en: &PathEnumeration) -> Vec<f64> {
    let z = oracle_partition(en);
    let mut out = vec![0.0; graph.edge_count()];
    for p in &en.paths {
        for pair in p.nodes.windows(2) {
            let e = graph
                .edge_index(pair[0], pair[1])
                .expect("enumerated path uses a graph edge");
            out[e] += p.weight;
        }
    }
    for v in &mut out {
        *v /= z;
    }
    out
}

/// Expected visit count of every node. A visit is counted at every path
/// position except the terminal one, so the target scores zero.
pub fn oracle_node_visits(graph: &Graph, en: &PathEnumeration) -> Vec<f64> {
    let z = oracle_partition(en);
    let mut out = vec![0.0; graph.node_count()];
    for p in &en.paths {
        for &v in &p.nodes[..p.nodes.len() - 1] {
            out[v] += p.weight;
        }
    }
    for v in &mut out {
        *v /= z;
    }
    out
}

/// Number of times `pattern` occurs as an ordered subsequence of `seq`,
/// counted with multiplicity over position choices.
pub fn ordered_subsequence_count<T: PartialEq>(seq: &[T], pattern: &[T]) -> u64 {
    let m = pattern.len();
    let mut f = vec![0u64; m + 1];
    f[0] = 1;
    for x in seq {
        for k in (1..=m).rev() {
            if *x == pattern[k - 1] {
                f[k] += f[k - 1];
            }
        }
    }
    f[m]
}

/// An observation whose probability the oracle evaluates by direct
/// summation over enumerated paths.
#[derive(Debug, Clone)]
pub enum OracleObservation {
    /// A single edge drawn uniformly from the path's edge sequence.
    OneEdge(usize, usize),
    /// A single node drawn uniformly from the path's interior nodes.
    OneNode(usize),
    /// M edges drawn uniformly without replacement, order preserved.
    MultiEdge(Vec<(usize, usize)>),
    /// M interior nodes drawn uniformly without replacement, order
    /// preserved.
    MultiNode(Vec<usize>),
    /// M edges kept by independent per-edge coin flips with probability
    /// p_mu, conditioned on at least one edge being kept; order preserved.
    BinomialEdges { edges: Vec<(usize, usize)>, p_mu: f64 },
}

/// Direct evaluation of the observation probability as a sum over the
/// enumerated paths. Returns a plain probability (not a log).
pub fn oracle_observation_likelihood(en: &PathEnumeration, obs: &OracleObservation) -> f64 {
    let z = oracle_partition(en);
    let mut total = 0.0;
    for p in &en.paths {
        let len = p.len();
        let contribution = match obs {
            OracleObservation::OneEdge(i, j) => {
                let pairs: Vec<(usize, usize)> =
                    p.nodes.windows(2).map(|w| (w[0], w[1])).collect();
                let count = pairs.iter().filter(|e| **e == (*i, *j)).count() as f64;
                count / len as f64
            }
            OracleObservation::OneNode(i) => {
                if len < 2 {
                    0.0
                } else {
                    let interior = &p.nodes[1..p.nodes.len() - 1];
                    let count = interior.iter().filter(|v| **v == *i).count() as f64;
                    count / (len - 1) as f64
                }
            }
            OracleObservation::MultiEdge(seq) => {
                let m = seq.len();
                if len < m {
                    0.0
                } else {
                    let pairs: Vec<(usize, usize)> =
                        p.nodes.windows(2).map(|w| (w[0], w[1])).collect();
                    let count = ordered_subsequence_count(&pairs, seq) as f64;
                    count / (len as f64 * binomial(len as u64, m as u64))
                }
            }
            OracleObservation::MultiNode(seq) => {
                let m = seq.len();
                if len < m + 1 {
                    0.0
                } else {
                    let interior = &p.nodes[1..p.nodes.len() - 1];
                    let count = ordered_subsequence_count(interior, seq) as f64;
                    count / ((len - 1) as f64 * binomial(len as u64 - 1, m as u64))
                }
            }
            OracleObservation::BinomialEdges { edges, p_mu } => {
                let m = edges.len();
                if len < m {
                    0.0
                } else {
                    let q = 1.0 - p_mu;
                    let pairs: Vec<(usize, usize)> =
                        p.nodes.windows(2).map(|w| (w[0], w[1])).collect();
                    let count = ordered_subsequence_count(&pairs, edges) as f64;
                    let pref = p_mu.powi(m as i32) / (q.powi(m as i32) * (1.0 - q.powi(m as i32)));
                    pref * q.powi(len as i32) * count
                }
            }
        };
        total += p.weight * contribution;
    }
    total / z
}

fn binomial(n: u64, k: u64) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut value = 1.0;
    for i in 0..k {
        value = value * (n - i) as f64 / (i + 1) as f64;
    }
    value
}

/// Least path cost from s to t (Dijkstra over edge costs).
pub fn least_cost(graph: &Graph, s: usize, t: usize) -> Option<f64> {
    #[derive(PartialEq)]
    struct Entry(f64, usize);
    impl Eq for Entry {}
    impl PartialOrd for Entry {
        fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
            Some(self.cmp(other))
        }
    }
    impl Ord for Entry {
        fn cmp(&self, other: &Self) -> std::cmp::Ordering {
            // Reversed: BinaryHeap is a max-heap.
            other.0.partial_cmp(&self.0).unwrap()
        }
    }
    let n = graph.node_count();
    let mut dist = vec![f64::INFINITY; n];
    dist[s] = 0.0;
    let mut heap = BinaryHeap::new();
    heap.push(Entry(0.0, s));
    while let Some(Entry(d, i)) = heap.pop() {
        if d > dist[i] {
            continue;
        }
        if i == t {
            return Some(d);
        }
        for (e, j, _, cost) in graph.out_edges(i) {
            let _ = e;
            let nd = d + cost;
            if nd < dist[j] {
                dist[j] = nd;
                heap.push(Entry(nd, j));
            }
        }
    }
    None
}

/// Expected cost for the plain reference random walk to first hit t,
/// from every start node: the absorbing-chain solve
/// (I − P_absorbed) h = rowsums(P_absorbed ∘ C), with row t of P zeroed.
pub fn rw_hitting_cost(graph: &Graph, t: usize) -> Result<DVector<f64>> {
    let n = graph.node_count();
    if t >= n {
        return Err(Error::NodeOutOfRange { node: t, n });
    }
    let probs = graph.transition_probs()?;
    let mut a = DMatrix::<f64>::identity(n, n);
    let mut rhs = DVector::<f64>::zeros(n);
    for i in 0..n {
        if i == t {
            continue;
        }
        for e in graph.row_ptr[i]..graph.row_ptr[i + 1] {
            let j = graph.col[e] as usize;
            a[(i, j)] -= probs[e];
            rhs[i] += probs[e] * graph.cost[e];
        }
    }
    a.lu()
        .solve(&rhs)
        .ok_or(Error::SingularSystem { what: "absorbing-chain hitting cost" })
}

/// Effective resistance between every node pair, treating affinities as
/// conductances of an undirected network (the graph must be symmetric in
/// its affinities). Uses the pseudo-inverse of the Laplacian via the
/// rank-one shift (L + J/n)^{-1} − J/n.
pub fn resistance_distance(graph: &Graph) -> Result<DMatrix<f64>> {
    let n = graph.node_count();
    for (i, j, a, _) in graph.edges() {
        let back = graph
            .edge_index(j, i)
            .map(|e| graph.affinity[e])
            .unwrap_or(0.0);
        if (a - back).abs() > 1e-12 * a.abs().max(back.abs()).max(1.0) {
            return Err(Error::BadParameter {
                what: format!("affinities are not symmetric on edge ({i}, {j})"),
            });
        }
    }
    let mut lap = DMatrix::<f64>::zeros(n, n);
    for (i, j, a, _) in graph.edges() {
        lap[(i, j)] -= a;
        lap[(i, i)] += a;
    }
    let shift = 1.0 / n as f64;
    for i in 0..n {
        for j in 0..n {
            lap[(i, j)] += shift;
        }
    }
    let pinv_shifted = lap
        .try_inverse()
        .ok_or(Error::SingularSystem { what: "Laplacian pseudo-inverse" })?;
    let mut res = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            // The J/n correction terms cancel in the resistance formula.
            res[(i, j)] = pinv_shifted[(i, i)] + pinv_shifted[(j, j)] - 2.0 * pinv_shifted[(i, j)];
        }
    }
    Ok(res)
}
