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

//! Shared fixtures for the integration suites: small hand-built graphs
//! and seeded random-graph recipes whose hitting paths stay enumerable.

#![allow(dead_code)]

use rand::Rng;
use rsp_core::Graph;

/// Two-route fixture: the direct edge 0→2 competes with the detour
/// 0→1→2. Unit affinities and unit costs throughout.
pub fn triangle() -> Graph {
    Graph::from_edges(3, &[(0, 1, 1.0, 1.0), (0, 2, 1.0, 1.0), (1, 2, 1.0, 1.0)], true)
        .expect("valid fixture")
}

/// Directed chain 0→1→…→n−1 with unit affinities and costs.
pub fn line(n: usize) -> Graph {
    let edges: Vec<(usize, usize, f64, f64)> =
        (0..n - 1).map(|i| (i, i + 1, 1.0, 1.0)).collect();
    Graph::from_edges(n, &edges, true).expect("valid fixture")
}

/// Bidirectional graph with unit affinities and costs on the given
/// undirected edges.
pub fn bidirectional(n: usize, links: &[(usize, usize)]) -> Graph {
    let mut edges = Vec::with_capacity(2 * links.len());
    for &(a, b) in links {
        edges.push((a, b, 1.0, 1.0));
        edges.push((b, a, 1.0, 1.0));
    }
    Graph::from_edges(n, &edges, false).expect("valid fixture")
}

/// Random layered graph whose every cycle passes through the last node:
/// a chain spine, random forward shortcuts, and up to two return edges
/// out of the final node. Hitting paths into the final node therefore
/// never revisit a node, so enumeration up to n edges is exhaustive.
pub fn random_funnel<R: Rng + ?Sized>(rng: &mut R) -> Graph {
    let n = rng.gen_range(4..=8);
    let mut edges: Vec<(usize, usize, f64, f64)> = Vec::new();
    for i in 0..n - 1 {
        edges.push((i, i + 1, rng.gen_range(0.5..2.0), rng.gen_range(0.5..2.0)));
    }
    for i in 0..n {
        for j in (i + 2)..n {
            if rng.gen_bool(0.35) {
                edges.push((i, j, rng.gen_range(0.5..2.0), rng.gen_range(0.5..2.0)));
            }
        }
    }
    for _ in 0..rng.gen_range(0..=2u32) {
        let v = rng.gen_range(0..n - 1);
        if edges.iter().all(|&(a, b, ..)| (a, b) != (n - 1, v)) {
            edges.push((n - 1, v, rng.gen_range(0.5..2.0), rng.gen_range(0.5..2.0)));
        }
    }
    Graph::from_edges(n, &edges, true).expect("valid recipe")
}

/// Random chain with one or two backward edges, forming cycles that
/// avoid the final node. Costs sit in [1.5, 3) so likelihood weights die
/// quickly and a modest enumeration depth certifies a tiny tail.
pub fn random_narrow_cycle<R: Rng + ?Sized>(rng: &mut R) -> Graph {
    let n = rng.gen_range(5..=8);
    let mut edges: Vec<(usize, usize, f64, f64)> = Vec::new();
    for i in 0..n - 1 {
        edges.push((i, i + 1, rng.gen_range(0.5..2.0), rng.gen_range(1.5..3.0)));
    }
    let backs = rng.gen_range(1..=2u32);
    let mut added = 0;
    while added < backs {
        let u = rng.gen_range(1..n - 1);
        let v = rng.gen_range(0..u);
        if edges.iter().all(|&(a, b, ..)| (a, b) != (u, v)) {
            edges.push((u, v, rng.gen_range(0.5..2.0), rng.gen_range(1.5..3.0)));
            added += 1;
        }
    }
    Graph::from_edges(n, &edges, true).expect("valid recipe")
}
