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

//! Trajectory sampling and subsampling.
//!
//! Complete walks are drawn from the path distribution by following the
//! target-conditioned transition rows until absorption. Incomplete
//! observations are produced by the matching subsampling protocols: a
//! uniformly sized, uniformly placed, order-preserving draw from a walk's
//! edges or interior nodes. All randomness comes through caller-provided
//! seedable generators so runs are reproducible.

use std::collections::HashMap;
use std::io::{BufRead, Write};

use rand::seq::index::sample as index_sample;
use rand::Rng;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::rsp::RspContext;

/// Safety valve for the absorption walk.
const STEP_CAP: usize = 10_000_000;
/// Default cap on the number of subsampled items.
pub const SUBSAMPLE_CAP: usize = 300;

/// A complete hitting walk: consecutive node pairs are graph edges and
/// the final node appears exactly once.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trajectory {
    nodes: Vec<usize>,
}

impl Trajectory {
    /// Validates the walk invariants against the graph.
    pub fn from_nodes(graph: &Graph, nodes: Vec<usize>) -> Result<Self> {
        if nodes.len() < 2 {
            return Err(Error::BadTrajectory {
                reason: "a walk needs at least two nodes".into(),
            });
        }
        for pair in nodes.windows(2) {
            if graph.edge_index(pair[0], pair[1]).is_none() {
                return Err(Error::BadTrajectory {
                    reason: format!("({}, {}) is not an edge", pair[0], pair[1]),
                });
            }
        }
        let last = *nodes.last().expect("non-empty");
        if nodes[..nodes.len() - 1].contains(&last) {
            return Err(Error::BadTrajectory {
                reason: format!("final node {last} appears before the end"),
            });
        }
        Ok(Self { nodes })
    }

    pub fn nodes(&self) -> &[usize] {
        &self.nodes
    }

    /// Number of steps (edges) in the walk.
    pub fn len(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn source(&self) -> usize {
        self.nodes[0]
    }

    pub fn target(&self) -> usize {
        *self.nodes.last().expect("non-empty")
    }

    /// Total edge cost of the walk.
    pub fn cost(&self, graph: &Graph) -> Result<f64> {
        let mut total = 0.0;
        for pair in self.nodes.windows(2) {
            let e = graph.edge_index(pair[0], pair[1]).ok_or(Error::BadTrajectory {
                reason: format!("({}, {}) is not an edge", pair[0], pair[1]),
            })?;
            total += graph.cost[e];
        }
        Ok(total)
    }

    /// Per-edge traversal counts in edge-array order.
    pub fn edge_counts(&self, graph: &Graph) -> Result<Vec<u32>> {
        let mut counts = vec![0u32; graph.edge_count()];
        for pair in self.nodes.windows(2) {
            let e = graph.edge_index(pair[0], pair[1]).ok_or(Error::BadTrajectory {
                reason: format!("({}, {}) is not an edge", pair[0], pair[1]),
            })?;
            counts[e] += 1;
        }
        Ok(counts)
    }
}

/// What was recorded about one walk.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ObservationKind {
    /// The full node sequence.
    Complete(Vec<usize>),
    /// An ordered subsequence of the interior nodes.
    Nodes(Vec<usize>),
    /// An ordered subsequence of the edges.
    Edges(Vec<(usize, usize)>),
}

/// One recorded walk between known endpoints.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Observation {
    pub s: usize,
    pub t: usize,
    pub kind: ObservationKind,
}

impl Observation {
    pub fn complete(traj: &Trajectory) -> Self {
        Self {
            s: traj.source(),
            t: traj.target(),
            kind: ObservationKind::Complete(traj.nodes().to_vec()),
        }
    }

    /// Number of observed items.
    pub fn observed_len(&self) -> usize {
        match &self.kind {
            ObservationKind::Complete(nodes) => nodes.len(),
            ObservationKind::Nodes(nodes) => nodes.len(),
            ObservationKind::Edges(edges) => edges.len(),
        }
    }
}

/// A collection of observations forming one data set.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TrajectorySet {
    pub observations: Vec<Observation>,
}

impl TrajectorySet {
    pub fn new(observations: Vec<Observation>) -> Self {
        Self { observations }
    }

    pub fn len(&self) -> usize {
        self.observations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.observations.is_empty()
    }

    pub fn push(&mut self, obs: Observation) {
        self.observations.push(obs);
    }

    /// Observation counts per (s, t) pair; absent pairs count zero.
    pub fn pair_counts(&self) -> HashMap<(usize, usize), usize> {
        let mut counts = HashMap::new();
        for obs in &self.observations {
            *counts.entry((obs.s, obs.t)).or_insert(0) += 1;
        }
        counts
    }

    /// One JSON object per line: `{"s", "t", "kind", "obs"}`. Edge
    /// observations store `obs` as an array of two-element arrays.
    pub fn write_jsonl<W: Write>(&self, mut w: W) -> Result<()> {
        for obs in &self.observations {
            let (kind, items) = match &obs.kind {
                ObservationKind::Complete(nodes) => ("complete", json!(nodes)),
                ObservationKind::Nodes(nodes) => ("nodes", json!(nodes)),
                ObservationKind::Edges(edges) => {
                    ("edges", json!(edges.iter().map(|&(i, j)| [i, j]).collect::<Vec<_>>()))
                }
            };
            let line = json!({"s": obs.s, "t": obs.t, "kind": kind, "obs": items});
            writeln!(w, "{line}")?;
        }
        Ok(())
    }

    pub fn read_jsonl<R: BufRead>(r: R) -> Result<Self> {
        let mut observations = Vec::new();
        for (lineno, line) in r.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let value: Value = serde_json::from_str(&line)?;
            observations.push(parse_observation(&value).map_err(|e| match e {
                Error::BadObservation { reason } => Error::BadObservation {
                    reason: format!("line {}: {reason}", lineno + 1),
                },
                other => other,
            })?);
        }
        Ok(Self { observations })
    }
}

fn parse_usize(value: &Value, what: &str) -> Result<usize> {
    value
        .as_u64()
        .map(|v| v as usize)
        .ok_or_else(|| Error::BadObservation { reason: format!("{what} is not an integer") })
}

fn parse_observation(value: &Value) -> Result<Observation> {
    let s = parse_usize(&value["s"], "field s")?;
    let t = parse_usize(&value["t"], "field t")?;
    if s == t {
        return Err(Error::BadObservation { reason: "s equals t".into() });
    }
    let obs = value["obs"]
        .as_array()
        .ok_or_else(|| Error::BadObservation { reason: "obs is not an array".into() })?;
    let kind = match value["kind"].as_str() {
        Some("complete") => {
            let nodes: Vec<usize> = obs
                .iter()
                .map(|v| parse_usize(v, "obs entry"))
                .collect::<Result<_>>()?;
            if nodes.first() != Some(&s) || nodes.last() != Some(&t) {
                return Err(Error::BadObservation {
                    reason: "complete walk does not run from s to t".into(),
                });
            }
            ObservationKind::Complete(nodes)
        }
        Some("nodes") => ObservationKind::Nodes(
            obs.iter()
                .map(|v| parse_usize(v, "obs entry"))
                .collect::<Result<_>>()?,
        ),
        Some("edges") => ObservationKind::Edges(
            obs.iter()
                .map(|v| {
                    let pair = v.as_array().filter(|a| a.len() == 2).ok_or_else(|| {
                        Error::BadObservation {
                            reason: "edge entry is not a two-element array".into(),
                        }
                    })?;
                    Ok((
                        parse_usize(&pair[0], "edge source")?,
                        parse_usize(&pair[1], "edge target")?,
                    ))
                })
                .collect::<Result<_>>()?,
        ),
        other => {
            return Err(Error::BadObservation {
                reason: format!("unknown kind {other:?}"),
            })
        }
    };
    Ok(Observation { s, t, kind })
}

/// Draws one hitting walk from s to t by following the target-conditioned
/// transition rows until absorption.
pub fn sample_path<R: Rng + ?Sized>(
    ctx: &RspContext,
    s: usize,
    t: usize,
    rng: &mut R,
) -> Result<Trajectory> {
    if s == t {
        return Err(Error::SameEndpoints { node: s });
    }
    let biased = ctx.biased_transitions(t)?;
    if !biased.is_reachable(s) {
        return Err(Error::Unreachable { s, t });
    }
    let graph = ctx.graph();
    let mut nodes = vec![s];
    let mut cur = s;
    for _ in 0..STEP_CAP {
        let lo = graph.row_ptr[cur];
        let hi = graph.row_ptr[cur + 1];
        let u: f64 = rng.gen();
        let mut acc = 0.0;
        let mut chosen = None;
        for e in lo..hi {
            let p = biased.probs[e];
            if p <= 0.0 {
                continue;
            }
            acc += p;
            chosen = Some(e);
            if u < acc {
                break;
            }
        }
        // The row sums to one up to rounding; the final positive entry
        // absorbs any residual.
        let e = chosen.ok_or(Error::SingularSystem { what: "conditioned transition row" })?;
        cur = graph.col[e] as usize;
        nodes.push(cur);
        if cur == t {
            return Ok(Trajectory { nodes });
        }
    }
    Err(Error::StepBudget { cap: STEP_CAP })
}

/// Uniformly sized, uniformly placed ordered draw from the walk's interior
/// nodes. One-step walks expose no interior node and yield `None`.
pub fn subsample_nodes<R: Rng + ?Sized>(
    traj: &Trajectory,
    rng: &mut R,
    cap: usize,
) -> Option<Observation> {
    let l = traj.len();
    if l < 2 {
        return None;
    }
    let eligible = l - 1;
    let m = rng.gen_range(1..=eligible).min(cap.max(1));
    let mut picks = index_sample(rng, eligible, m).into_vec();
    picks.sort_unstable();
    let nodes: Vec<usize> = picks.iter().map(|&p| traj.nodes[p + 1]).collect();
    Some(Observation {
        s: traj.source(),
        t: traj.target(),
        kind: ObservationKind::Nodes(nodes),
    })
}

/// Uniformly sized, uniformly placed ordered draw from the walk's edges.
pub fn subsample_edges<R: Rng + ?Sized>(
    traj: &Trajectory,
    rng: &mut R,
    cap: usize,
) -> Observation {
    let l = traj.len();
    let m = rng.gen_range(1..=l).min(cap.max(1));
    let mut picks = index_sample(rng, l, m).into_vec();
    picks.sort_unstable();
    let edges: Vec<(usize, usize)> = picks
        .iter()
        .map(|&p| (traj.nodes[p], traj.nodes[p + 1]))
        .collect();
    Observation {
        s: traj.source(),
        t: traj.target(),
        kind: ObservationKind::Edges(edges),
    }
}

/// Extracts endpoints from a raw recorded node sequence: the source is the
/// first element, the target is the first element inside `target_set`, the
/// observation is everything strictly between (the tail past the target is
/// dropped). The observation may come out empty.
pub fn determine_endpoints(raw: &[usize], target_set: &[usize]) -> Result<Observation> {
    let first = *raw.first().ok_or(Error::BadObservation {
        reason: "empty recorded sequence".into(),
    })?;
    let t_pos = raw
        .iter()
        .position(|v| target_set.contains(v))
        .ok_or(Error::BadObservation {
            reason: "no recorded element is in the target set".into(),
        })?;
    if t_pos == 0 {
        return Err(Error::SameEndpoints { node: first });
    }
    let t = raw[t_pos];
    let nodes: Vec<usize> = raw[1..t_pos].iter().copied().filter(|&v| v != t).collect();
    Ok(Observation { s: first, t, kind: ObservationKind::Nodes(nodes) })
}

/// Uniform draw over ordered pairs whose hop distance is at least
/// `min_hops`, by rejection.
pub fn sample_separated_pair<R: Rng + ?Sized>(
    graph: &Graph,
    min_hops: usize,
    rng: &mut R,
) -> Result<(usize, usize)> {
    let n = graph.node_count();
    if n < 2 {
        return Err(Error::BadParameter {
            what: "pair sampling needs at least two nodes".into(),
        });
    }
    for _ in 0..100_000 {
        let s = rng.gen_range(0..n);
        let t = rng.gen_range(0..n);
        if s == t {
            continue;
        }
        if let Some(d) = graph.hop_distance(s, t) {
            if d >= min_hops {
                return Ok((s, t));
            }
        }
    }
    Err(Error::BadParameter {
        what: format!("no pair at hop distance ≥ {min_hops} found"),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{build_grid, CostField};
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;
    use statrs::distribution::{ChiSquared, ContinuousCDF};

    const LN2: f64 = std::f64::consts::LN_2;

    fn triangle() -> Graph {
        Graph::from_edges(
            3,
            &[(0, 1, 1.0, 1.0), (0, 2, 1.0, 1.0), (1, 2, 1.0, 1.0)],
            true,
        )
        .unwrap()
    }

    fn looped_line() -> Graph {
        Graph::from_edges(
            6,
            &[
                (0, 1, 1.0, 0.9),
                (1, 2, 1.0, 1.1),
                (2, 3, 1.0, 0.8),
                (3, 1, 0.5, 1.0),
                (2, 4, 0.6, 1.3),
                (3, 5, 1.0, 1.2),
                (4, 5, 1.0, 0.7),
            ],
            true,
        )
        .unwrap()
    }

    fn line_trajectory(n: usize) -> (Graph, Trajectory) {
        let edges: Vec<(usize, usize, f64, f64)> =
            (0..n - 1).map(|i| (i, i + 1, 1.0, 1.0)).collect();
        let g = Graph::from_edges(n, &edges, true).unwrap();
        let traj = Trajectory::from_nodes(&g, (0..n).collect()).unwrap();
        (g, traj)
    }

    #[test]
    fn trajectory_invariants_are_enforced() {
        let g = triangle();
        assert!(Trajectory::from_nodes(&g, vec![0]).is_err());
        assert!(Trajectory::from_nodes(&g, vec![0, 2, 1]).is_err());
        assert!(Trajectory::from_nodes(&g, vec![1, 0]).is_err());
        let traj = Trajectory::from_nodes(&g, vec![0, 1, 2]).unwrap();
        assert_eq!(traj.len(), 2);
        assert_eq!(traj.source(), 0);
        assert_eq!(traj.target(), 2);
        assert_relative_eq!(traj.cost(&g).unwrap(), 2.0);
        assert_eq!(traj.edge_counts(&g).unwrap(), vec![1, 0, 1]);
    }

    #[test]
    fn forced_edge_always_sampled() {
        let g = Graph::from_edges(2, &[(0, 1, 1.0, 1.0)], true).unwrap();
        let ctx = RspContext::new(&g, 1.0).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(1);
        for _ in 0..50 {
            let traj = sample_path(&ctx, 0, 1, &mut rng).unwrap();
            assert_eq!(traj.nodes(), &[0, 1]);
        }
    }

    #[test]
    fn triangle_path_frequency_matches_the_law() {
        let g = triangle();
        let ctx = RspContext::new(&g, LN2).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(7);
        let total = 100_000;
        let mut direct = 0usize;
        for _ in 0..total {
            let traj = sample_path(&ctx, 0, 2, &mut rng).unwrap();
            if traj.nodes() == [0, 2] {
                direct += 1;
            }
        }
        // True probability 2/3; three standard errors of 1e5 draws.
        let freq = direct as f64 / total as f64;
        let se = (2.0 / 3.0 * (1.0 / 3.0) / total as f64).sqrt();
        assert!(
            (freq - 2.0 / 3.0).abs() < 3.0 * se,
            "frequency {freq} outside 2/3 ± {}",
            3.0 * se
        );
    }

    #[test]
    fn sampled_walks_satisfy_invariants() {
        let g = looped_line();
        let ctx = RspContext::new(&g, 0.4).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(11);
        for _ in 0..300 {
            let traj = sample_path(&ctx, 0, 5, &mut rng).unwrap();
            Trajectory::from_nodes(&g, traj.nodes().to_vec()).unwrap();
            assert_eq!(traj.source(), 0);
            assert_eq!(traj.target(), 5);
        }
    }

    #[test]
    fn unreachable_and_degenerate_sampling_requests_error() {
        let g = triangle();
        let ctx = RspContext::new(&g, LN2).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(3);
        assert!(matches!(
            sample_path(&ctx, 1, 0, &mut rng),
            Err(Error::Unreachable { .. })
        ));
        assert!(matches!(
            sample_path(&ctx, 2, 2, &mut rng),
            Err(Error::SameEndpoints { .. })
        ));
    }

    #[test]
    fn subsample_size_is_uniform() {
        let (_, traj) = line_trajectory(11);
        assert_eq!(traj.len(), 10);
        let mut rng = ChaCha12Rng::seed_from_u64(5);
        let draws = 10_000;
        let mut counts = [0usize; 10];
        for _ in 0..draws {
            let obs = subsample_edges(&traj, &mut rng, SUBSAMPLE_CAP);
            counts[obs.observed_len() - 1] += 1;
        }
        let expected = draws as f64 / 10.0;
        let stat: f64 = counts
            .iter()
            .map(|&c| {
                let d = c as f64 - expected;
                d * d / expected
            })
            .sum();
        let p = 1.0 - ChiSquared::new(9.0).unwrap().cdf(stat);
        assert!(p > 0.01, "chi-square statistic {stat}, p {p}");
    }

    #[test]
    fn node_subsampling_excludes_the_endpoints() {
        let (_, traj) = line_trajectory(12);
        let mut rng = ChaCha12Rng::seed_from_u64(9);
        for _ in 0..500 {
            let obs = subsample_nodes(&traj, &mut rng, SUBSAMPLE_CAP).unwrap();
            let ObservationKind::Nodes(nodes) = &obs.kind else {
                panic!("wrong kind")
            };
            assert!(!nodes.is_empty());
            assert!(nodes.iter().all(|&v| v != 0 && v != 11));
            assert!(nodes.windows(2).all(|w| w[0] < w[1]), "order not preserved");
        }
    }

    #[test]
    fn short_walk_subsampling_edge_cases() {
        let g = Graph::from_edges(2, &[(0, 1, 1.0, 1.0)], true).unwrap();
        let traj = Trajectory::from_nodes(&g, vec![0, 1]).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(2);
        assert!(subsample_nodes(&traj, &mut rng, SUBSAMPLE_CAP).is_none());
        let obs = subsample_edges(&traj, &mut rng, SUBSAMPLE_CAP);
        assert_eq!(obs.kind, ObservationKind::Edges(vec![(0, 1)]));

        let g3 = Graph::from_edges(3, &[(0, 1, 1.0, 1.0), (1, 2, 1.0, 1.0)], true).unwrap();
        let traj3 = Trajectory::from_nodes(&g3, vec![0, 1, 2]).unwrap();
        let obs3 = subsample_nodes(&traj3, &mut rng, SUBSAMPLE_CAP).unwrap();
        assert_eq!(obs3.kind, ObservationKind::Nodes(vec![1]));
    }

    #[test]
    fn subsample_cap_binds() {
        let (_, traj) = line_trajectory(60);
        let mut rng = ChaCha12Rng::seed_from_u64(21);
        for _ in 0..200 {
            let obs = subsample_edges(&traj, &mut rng, 5);
            assert!(obs.observed_len() <= 5);
            let obs = subsample_nodes(&traj, &mut rng, 5).unwrap();
            assert!(obs.observed_len() <= 5);
        }
    }

    #[test]
    fn subsampled_edges_are_an_ordered_subsequence() {
        let g = looped_line();
        let ctx = RspContext::new(&g, 0.4).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(13);
        for _ in 0..200 {
            let traj = sample_path(&ctx, 0, 5, &mut rng).unwrap();
            let obs = subsample_edges(&traj, &mut rng, SUBSAMPLE_CAP);
            let ObservationKind::Edges(edges) = &obs.kind else {
                panic!("wrong kind")
            };
            let walk: Vec<(usize, usize)> =
                traj.nodes().windows(2).map(|w| (w[0], w[1])).collect();
            let mut at = 0usize;
            for e in edges {
                match walk[at..].iter().position(|w| w == e) {
                    Some(p) => at += p + 1,
                    None => panic!("{e:?} is not a forward match in {walk:?}"),
                }
            }
        }
    }

    #[test]
    fn endpoint_extraction_rules() {
        let obs = determine_endpoints(&[4, 7, 9, 12, 13], &[12, 13]).unwrap();
        assert_eq!((obs.s, obs.t), (4, 12));
        assert_eq!(obs.kind, ObservationKind::Nodes(vec![7, 9]));

        let empty = determine_endpoints(&[4, 12], &[12, 13]).unwrap();
        assert_eq!((empty.s, empty.t), (4, 12));
        assert_eq!(empty.kind, ObservationKind::Nodes(vec![]));

        assert!(matches!(
            determine_endpoints(&[4, 7], &[99]),
            Err(Error::BadObservation { .. })
        ));
        assert!(matches!(
            determine_endpoints(&[12, 4], &[12]),
            Err(Error::SameEndpoints { .. })
        ));
        assert!(determine_endpoints(&[], &[1]).is_err());
    }

    #[test]
    fn pair_sampling_respects_the_separation() {
        let field = CostField::uniform(8, 8, 1.0).unwrap();
        let g = build_grid(&field, true).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(17);
        for _ in 0..100 {
            let (s, t) = sample_separated_pair(&g, 3, &mut rng).unwrap();
            assert!(g.hop_distance(s, t).unwrap() >= 3);
        }
    }

    #[test]
    fn jsonl_round_trip() {
        let g = triangle();
        let traj = Trajectory::from_nodes(&g, vec![0, 1, 2]).unwrap();
        let set = TrajectorySet::new(vec![
            Observation::complete(&traj),
            Observation { s: 0, t: 2, kind: ObservationKind::Nodes(vec![1]) },
            Observation { s: 0, t: 2, kind: ObservationKind::Edges(vec![(0, 1), (1, 2)]) },
        ]);
        let mut buf = Vec::new();
        set.write_jsonl(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert_eq!(text.lines().count(), 3);
        assert!(text.lines().next().unwrap().contains("\"complete\""));
        let back = TrajectorySet::read_jsonl(buf.as_slice()).unwrap();
        assert_eq!(back, set);
        assert_eq!(back.pair_counts()[&(0, 2)], 3);
    }

    #[test]
    fn jsonl_rejects_malformed_records() {
        for line in [
            r#"{"s": 0, "t": 0, "kind": "nodes", "obs": [1]}"#,
            r#"{"s": 0, "t": 2, "kind": "mystery", "obs": []}"#,
            r#"{"s": 0, "t": 2, "kind": "complete", "obs": [0, 1]}"#,
            r#"{"s": 0, "t": 2, "kind": "edges", "obs": [[0]]}"#,
        ] {
            assert!(
                TrajectorySet::read_jsonl(line.as_bytes()).is_err(),
                "accepted: {line}"
            );
        }
    }

    #[test]
    fn deterministic_given_the_seed() {
        let g = looped_line();
        let ctx = RspContext::new(&g, 0.4).unwrap();
        let run = || {
            let mut rng = ChaCha12Rng::seed_from_u64(123);
            let traj = sample_path(&ctx, 0, 5, &mut rng).unwrap();
            let obs = subsample_edges(&traj, &mut rng, SUBSAMPLE_CAP);
            (traj, obs)
        };
        assert_eq!(run(), run());
    }
}
