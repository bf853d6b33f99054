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

//! Directed weighted graphs with per-edge affinities and costs.
//!
//! Every edge (i, j) carries an affinity `a_ij > 0` and a cost `c_ij > 0`.
//! Affinities define the reference random walk through row normalization,
//! `p_ij = a_ij / sum_k a_ik`; costs define path optimality. Grid builders,
//! a seeded Gaussian cost-landscape generator, and a plain CSV edge-list
//! format cover the standard experiment setups.

use std::cmp::Reverse;
use std::collections::BinaryHeap;
use std::collections::HashSet;
use std::collections::VecDeque;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use nalgebra::DMatrix;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use crate::error::{Error, Result};

/// Finite non-negative cost with a total order, for the Dijkstra heap.
#[derive(Debug, Clone, Copy, PartialEq)]
struct OrderedCost(f64);

impl Eq for OrderedCost {}

impl PartialOrd for OrderedCost {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for OrderedCost {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0)
    }
}

/// Shape metadata kept by grid-built graphs so results can be rendered back
/// onto the pixel raster.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GridShape {
    pub rows: usize,
    pub cols: usize,
    pub diagonals: bool,
}

/// A directed graph in compressed sparse row form, rows sorted by
/// destination. Immutable after construction.
#[derive(Debug, Clone)]
pub struct Graph {
    n: usize,
    pub(crate) row_ptr: Vec<usize>,
    pub(crate) col: Vec<u32>,
    pub(crate) affinity: Vec<f64>,
    pub(crate) cost: Vec<f64>,
    allow_sinks: bool,
    grid: Option<GridShape>,
}

impl Graph {
    /// Build a graph from an edge list. Each entry is (src, dst, affinity,
    /// cost). Self-loops, duplicate (src, dst) pairs, and non-positive
    /// weights are rejected. Nodes without outgoing edges are rejected
    /// unless `allow_sinks` is set.
    pub fn from_edges(
        n: usize,
        edges: &[(usize, usize, f64, f64)],
        allow_sinks: bool,
    ) -> Result<Self> {
        if n == 0 {
            return Err(Error::BadParameter {
                what: "graph must have at least one node".into(),
            });
        }
        if n > u32::MAX as usize {
            return Err(Error::BadParameter {
                what: format!("node count {n} exceeds the supported maximum"),
            });
        }
        let mut sorted: Vec<(usize, usize, f64, f64)> = edges.to_vec();
        sorted.sort_unstable_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        for &(src, dst, affinity, cost) in &sorted {
            if src >= n {
                return Err(Error::NodeOutOfRange { node: src, n });
            }
            if dst >= n {
                return Err(Error::NodeOutOfRange { node: dst, n });
            }
            if src == dst {
                return Err(Error::SelfLoop { node: src });
            }
            if !(affinity > 0.0) || !affinity.is_finite() {
                return Err(Error::NonPositiveWeight {
                    src,
                    dst,
                    what: "affinity",
                    value: affinity,
                });
            }
            if !(cost > 0.0) || !cost.is_finite() {
                return Err(Error::NonPositiveWeight {
                    src,
                    dst,
                    what: "cost",
                    value: cost,
                });
            }
        }
        for pair in sorted.windows(2) {
            if pair[0].0 == pair[1].0 && pair[0].1 == pair[1].1 {
                return Err(Error::DuplicateEdge {
                    src: pair[0].0,
                    dst: pair[0].1,
                });
            }
        }
        let mut row_ptr = vec![0usize; n + 1];
        for &(src, ..) in &sorted {
            row_ptr[src + 1] += 1;
        }
        for i in 0..n {
            row_ptr[i + 1] += row_ptr[i];
        }
        if !allow_sinks {
            for i in 0..n {
                if row_ptr[i] == row_ptr[i + 1] {
                    return Err(Error::SinkNode { node: i });
                }
            }
        }
        let m = sorted.len();
        let mut col = Vec::with_capacity(m);
        let mut affinity_v = Vec::with_capacity(m);
        let mut cost_v = Vec::with_capacity(m);
        for (_, dst, a, c) in sorted {
            col.push(dst as u32);
            affinity_v.push(a);
            cost_v.push(c);
        }
        Ok(Graph {
            n,
            row_ptr,
            col,
            affinity: affinity_v,
            cost: cost_v,
            allow_sinks,
            grid: None,
        })
    }

    /// Same topology and affinities with replaced edge costs, given in
    /// edge-array order.
    pub fn with_costs(&self, costs: &[f64]) -> Result<Graph> {
        if costs.len() != self.edge_count() {
            return Err(Error::BadParameter {
                what: format!(
                    "cost vector length {} does not match edge count {}",
                    costs.len(),
                    self.edge_count()
                ),
            });
        }
        if let Some(&bad) = costs.iter().find(|c| !(**c > 0.0) || !c.is_finite()) {
            return Err(Error::BadParameter {
                what: format!("edge costs must be positive and finite, got {bad}"),
            });
        }
        let mut out = self.clone();
        out.cost = costs.to_vec();
        Ok(out)
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.col.len()
    }

    pub fn sinks_allowed(&self) -> bool {
        self.allow_sinks
    }

    pub fn grid_shape(&self) -> Option<GridShape> {
        self.grid
    }

    pub fn out_degree(&self, i: usize) -> usize {
        self.row_ptr[i + 1] - self.row_ptr[i]
    }

    /// Iterate all edges as (src, dst, affinity, cost) in row-sorted order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, f64, f64)> + '_ {
        (0..self.n).flat_map(move |i| {
            (self.row_ptr[i]..self.row_ptr[i + 1]).map(move |e| {
                (i, self.col[e] as usize, self.affinity[e], self.cost[e])
            })
        })
    }

    /// Outgoing edges of `i` as (edge index, dst, affinity, cost).
    pub fn out_edges(&self, i: usize) -> impl Iterator<Item = (usize, usize, f64, f64)> + '_ {
        (self.row_ptr[i]..self.row_ptr[i + 1])
            .map(move |e| (e, self.col[e] as usize, self.affinity[e], self.cost[e]))
    }

    /// Index of edge (i, j) in edge-array order, if present.
    pub fn edge_index(&self, i: usize, j: usize) -> Option<usize> {
        if i >= self.n || j >= self.n {
            return None;
        }
        let row = &self.col[self.row_ptr[i]..self.row_ptr[i + 1]];
        row.binary_search(&(j as u32))
            .ok()
            .map(|k| self.row_ptr[i] + k)
    }

    /// Per-edge reference random-walk probabilities, aligned with edge-array
    /// order: p_ij = a_ij / sum_k a_ik.
    pub fn transition_probs(&self) -> Result<Vec<f64>> {
        let mut probs = vec![0.0; self.edge_count()];
        for i in 0..self.n {
            let lo = self.row_ptr[i];
            let hi = self.row_ptr[i + 1];
            if lo == hi {
                if !self.allow_sinks {
                    return Err(Error::SinkNode { node: i });
                }
                continue;
            }
            let total: f64 = self.affinity[lo..hi].iter().sum();
            for e in lo..hi {
                probs[e] = self.affinity[e] / total;
            }
        }
        Ok(probs)
    }

    /// Dense reference transition matrix. Rows of nodes with outgoing edges
    /// sum to one; sink rows (permitted only by the construction flag) are
    /// zero.
    pub fn reference_transitions(&self) -> Result<DMatrix<f64>> {
        let probs = self.transition_probs()?;
        let mut p = DMatrix::zeros(self.n, self.n);
        for i in 0..self.n {
            for e in self.row_ptr[i]..self.row_ptr[i + 1] {
                p[(i, self.col[e] as usize)] = probs[e];
            }
        }
        Ok(p)
    }

    /// Unweighted hop count of the shortest directed path from s to t.
    pub fn hop_distance(&self, s: usize, t: usize) -> Option<usize> {
        if s >= self.n || t >= self.n {
            return None;
        }
        if s == t {
            return Some(0);
        }
        let mut dist = vec![usize::MAX; self.n];
        dist[s] = 0;
        let mut queue = VecDeque::from([s]);
        while let Some(i) = queue.pop_front() {
            for e in self.row_ptr[i]..self.row_ptr[i + 1] {
                let j = self.col[e] as usize;
                if dist[j] == usize::MAX {
                    dist[j] = dist[i] + 1;
                    if j == t {
                        return Some(dist[j]);
                    }
                    queue.push_back(j);
                }
            }
        }
        None
    }

    /// Minimum total cost of a directed path from each node to t, by
    /// reverse Dijkstra; infinity where t is unreachable, zero at t.
    pub fn min_cost_to_target(&self, t: usize) -> Result<Vec<f64>> {
        if t >= self.n {
            return Err(Error::NodeOutOfRange { node: t, n: self.n });
        }
        let mut reverse: Vec<Vec<(usize, f64)>> = vec![Vec::new(); self.n];
        for (src, dst, _, cost) in self.edges() {
            reverse[dst].push((src, cost));
        }
        let mut dist = vec![f64::INFINITY; self.n];
        dist[t] = 0.0;
        // Max-heap on Reverse(cost); ties broken by node index.
        let mut heap = BinaryHeap::from([(Reverse(OrderedCost(0.0)), t)]);
        while let Some((Reverse(OrderedCost(d)), j)) = heap.pop() {
            if d > dist[j] {
                continue;
            }
            for &(i, cost) in &reverse[j] {
                let candidate = d + cost;
                if candidate < dist[i] {
                    dist[i] = candidate;
                    heap.push((Reverse(OrderedCost(candidate)), i));
                }
            }
        }
        Ok(dist)
    }

    /// Whether every node can reach every other node along directed edges.
    pub fn is_strongly_connected(&self) -> bool {
        if self.n == 1 {
            return true;
        }
        let forward = self.reach_count(0, false);
        if forward != self.n {
            return false;
        }
        self.reach_count(0, true) == self.n
    }

    fn reach_count(&self, start: usize, reversed: bool) -> usize {
        let reverse_adj = if reversed {
            let mut adj = vec![Vec::new(); self.n];
            for (src, dst, ..) in self.edges() {
                adj[dst].push(src);
            }
            Some(adj)
        } else {
            None
        };
        let mut seen = vec![false; self.n];
        seen[start] = true;
        let mut queue = VecDeque::from([start]);
        let mut count = 1;
        while let Some(i) = queue.pop_front() {
            let mut visit = |j: usize, seen: &mut Vec<bool>, queue: &mut VecDeque<usize>| {
                if !seen[j] {
                    seen[j] = true;
                    count += 1;
                    queue.push_back(j);
                }
            };
            match &reverse_adj {
                Some(adj) => {
                    for &j in &adj[i] {
                        visit(j, &mut seen, &mut queue);
                    }
                }
                None => {
                    for e in self.row_ptr[i]..self.row_ptr[i + 1] {
                        visit(self.col[e] as usize, &mut seen, &mut queue);
                    }
                }
            }
        }
        count
    }

    /// Write the graph as CSV with header `src,dst,affinity,cost`.
    pub fn save_edge_list<W: Write>(&self, sink: W) -> Result<()> {
        let mut writer = csv::Writer::from_writer(sink);
        writer.write_record(["src", "dst", "affinity", "cost"])?;
        for (src, dst, affinity, cost) in self.edges() {
            writer.write_record([
                src.to_string(),
                dst.to_string(),
                affinity.to_string(),
                cost.to_string(),
            ])?;
        }
        writer.flush()?;
        Ok(())
    }

    pub fn save_edge_list_path<P: AsRef<Path>>(&self, path: P) -> Result<()> {
        self.save_edge_list(std::fs::File::create(path)?)
    }

    /// Read a CSV edge list written by [`Graph::save_edge_list`]. The node
    /// count is one plus the largest id mentioned. Sink nodes are permitted
    /// (edge lists cannot distinguish a sink from a deliberate fixture), so
    /// validation of sinks is left to the operations that require them
    /// absent.
    pub fn load_edge_list<R: Read>(source: R) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .flexible(true)
            .from_reader(source);
        {
            let headers = reader.headers()?;
            let expect = ["src", "dst", "affinity", "cost"];
            let got: Vec<&str> = headers.iter().collect();
            if got != expect {
                return Err(Error::EdgeList {
                    line: 1,
                    reason: format!("expected header src,dst,affinity,cost, got {}", got.join(",")),
                });
            }
        }
        let mut edges = Vec::new();
        let mut seen = HashSet::new();
        let mut max_node = 0usize;
        for record in reader.records() {
            let record = record?;
            let line = record.position().map(|p| p.line()).unwrap_or(0);
            if record.len() != 4 {
                return Err(Error::EdgeList {
                    line,
                    reason: format!("expected 4 fields, got {}", record.len()),
                });
            }
            let field = |idx: usize, what: &str| -> Result<&str> {
                record.get(idx).ok_or_else(|| Error::EdgeList {
                    line,
                    reason: format!("missing {what}"),
                })
            };
            let src: usize = field(0, "src")?.parse().map_err(|e| Error::EdgeList {
                line,
                reason: format!("bad src: {e}"),
            })?;
            let dst: usize = field(1, "dst")?.parse().map_err(|e| Error::EdgeList {
                line,
                reason: format!("bad dst: {e}"),
            })?;
            let affinity: f64 = field(2, "affinity")?.parse().map_err(|e| Error::EdgeList {
                line,
                reason: format!("bad affinity: {e}"),
            })?;
            let cost: f64 = field(3, "cost")?.parse().map_err(|e| Error::EdgeList {
                line,
                reason: format!("bad cost: {e}"),
            })?;
            if src == dst {
                return Err(Error::EdgeList {
                    line,
                    reason: format!("self-loop on node {src}"),
                });
            }
            if !(affinity > 0.0) || !affinity.is_finite() {
                return Err(Error::EdgeList {
                    line,
                    reason: format!("affinity must be positive, got {affinity}"),
                });
            }
            if !(cost > 0.0) || !cost.is_finite() {
                return Err(Error::EdgeList {
                    line,
                    reason: format!("cost must be positive, got {cost}"),
                });
            }
            if !seen.insert((src, dst)) {
                return Err(Error::EdgeList {
                    line,
                    reason: format!("duplicate edge ({src}, {dst})"),
                });
            }
            max_node = max_node.max(src).max(dst);
            edges.push((src, dst, affinity, cost));
        }
        if edges.is_empty() {
            return Err(Error::EdgeList {
                line: 1,
                reason: "edge list contains no edges".into(),
            });
        }
        Self::from_edges(max_node + 1, &edges, true)
    }

    pub fn load_edge_list_path<P: AsRef<Path>>(path: P) -> Result<Self> {
        Self::load_edge_list(std::fs::File::open(path)?)
    }
}

/// Per-pixel positive costs on a rows x cols raster, row-major, row 0 at the
/// top.
#[derive(Debug, Clone, PartialEq)]
pub struct CostField {
    rows: usize,
    cols: usize,
    values: Vec<f64>,
}

impl CostField {
    pub fn new(rows: usize, cols: usize, values: Vec<f64>) -> Result<Self> {
        if rows * cols < 2 {
            return Err(Error::BadParameter {
                what: format!("raster {rows}x{cols} must contain at least 2 pixels"),
            });
        }
        if values.len() != rows * cols {
            return Err(Error::BadParameter {
                what: format!(
                    "raster {rows}x{cols} expects {} values, got {}",
                    rows * cols,
                    values.len()
                ),
            });
        }
        if let Some(bad) = values.iter().find(|v| !(**v > 0.0) || !v.is_finite()) {
            return Err(Error::BadParameter {
                what: format!("pixel costs must be positive and finite, got {bad}"),
            });
        }
        Ok(CostField { rows, cols, values })
    }

    pub fn uniform(rows: usize, cols: usize, value: f64) -> Result<Self> {
        Self::new(rows, cols, vec![value; rows * cols])
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.cols + col]
    }

    /// Plain-text raster: one line per row, whitespace-separated costs.
    pub fn write_raster<W: Write>(&self, mut sink: W) -> Result<()> {
        for r in 0..self.rows {
            let row = &self.values[r * self.cols..(r + 1) * self.cols];
            let line: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            writeln!(sink, "{}", line.join(" "))?;
        }
        Ok(())
    }

    pub fn read_raster<R: Read>(source: R) -> Result<Self> {
        let reader = BufReader::new(source);
        let mut values = Vec::new();
        let mut cols = None;
        let mut rows = 0;
        for (idx, line) in reader.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let mut row = Vec::new();
            for token in line.split_whitespace() {
                let v: f64 = token.parse().map_err(|e| Error::Raster {
                    line: idx + 1,
                    reason: format!("bad value {token:?}: {e}"),
                })?;
                row.push(v);
            }
            match cols {
                None => cols = Some(row.len()),
                Some(c) if c != row.len() => {
                    return Err(Error::Raster {
                        line: idx + 1,
                        reason: format!("expected {c} values, got {}", row.len()),
                    })
                }
                _ => {}
            }
            values.extend(row);
            rows += 1;
        }
        let cols = cols.ok_or(Error::Raster {
            line: 1,
            reason: "empty raster".into(),
        })?;
        Self::new(rows, cols, values)
    }
}

/// Parameters of the Gaussian cost landscape generator. `width` is the
/// standard deviation of each patch in pixels; `None` uses
/// min(rows, cols)/5.
#[derive(Debug, Clone)]
pub struct LandscapeParams {
    pub n_low: usize,
    pub n_high: usize,
    pub base_cost: f64,
    pub amplitude: f64,
    pub width: Option<f64>,
    pub floor: f64,
}

impl Default for LandscapeParams {
    fn default() -> Self {
        LandscapeParams {
            n_low: 5,
            n_high: 5,
            base_cost: 0.5,
            amplitude: 0.4,
            width: None,
            floor: 0.05,
        }
    }
}

/// Generate a cost raster as a base value plus `n_high` positive and
/// `n_low` negative Gaussian patches at seeded uniform pixel centers (low
/// centers drawn first). Values are clamped to at least `floor`.
pub fn gaussian_landscape(
    rows: usize,
    cols: usize,
    params: &LandscapeParams,
    seed: u64,
) -> Result<CostField> {
    if rows * cols < 2 {
        return Err(Error::BadParameter {
            what: format!("landscape {rows}x{cols} must contain at least 2 pixels"),
        });
    }
    if !(params.base_cost > 0.0) {
        return Err(Error::BadParameter {
            what: format!("base cost must be positive, got {}", params.base_cost),
        });
    }
    if params.amplitude < 0.0 {
        return Err(Error::BadParameter {
            what: format!("amplitude must be nonnegative, got {}", params.amplitude),
        });
    }
    if !(params.floor > 0.0) || params.floor > params.base_cost {
        return Err(Error::BadParameter {
            what: format!(
                "floor must lie in (0, base_cost], got {} with base {}",
                params.floor, params.base_cost
            ),
        });
    }
    let width = params
        .width
        .unwrap_or_else(|| (rows.min(cols) as f64) / 5.0);
    if !(width > 0.0) {
        return Err(Error::BadParameter {
            what: format!("patch width must be positive, got {width}"),
        });
    }
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let draw_centers = |count: usize, rng: &mut ChaCha12Rng| -> Vec<(f64, f64)> {
        (0..count)
            .map(|_| {
                let r = rng.gen_range(0..rows) as f64;
                let c = rng.gen_range(0..cols) as f64;
                (r, c)
            })
            .collect()
    };
    let low = draw_centers(params.n_low, &mut rng);
    let high = draw_centers(params.n_high, &mut rng);
    let two_sigma_sq = 2.0 * width * width;
    let mut values = Vec::with_capacity(rows * cols);
    for r in 0..rows {
        for c in 0..cols {
            let mut v = params.base_cost;
            for &(pr, pc) in &low {
                let d2 = (r as f64 - pr).powi(2) + (c as f64 - pc).powi(2);
                v -= params.amplitude * (-d2 / two_sigma_sq).exp();
            }
            for &(pr, pc) in &high {
                let d2 = (r as f64 - pr).powi(2) + (c as f64 - pc).powi(2);
                v += params.amplitude * (-d2 / two_sigma_sq).exp();
            }
            values.push(v.max(params.floor));
        }
    }
    CostField::new(rows, cols, values)
}

/// Build a grid graph over the raster: node id = row·cols + col, edges to
/// the 4 axis neighbors, plus the 4 diagonal neighbors when `diagonals` is
/// set. The cost of any edge into pixel j is the pixel cost c_j, multiplied
/// by sqrt(2) on diagonal moves; affinities are reciprocals of edge costs.
pub fn build_grid(field: &CostField, diagonals: bool) -> Result<Graph> {
    let rows = field.rows();
    let cols = field.cols();
    let n = rows * cols;
    let mut edges = Vec::new();
    let offsets: &[(isize, isize)] = if diagonals {
        &[
            (-1, -1),
            (-1, 0),
            (-1, 1),
            (0, -1),
            (0, 1),
            (1, -1),
            (1, 0),
            (1, 1),
        ]
    } else {
        &[(-1, 0), (0, -1), (0, 1), (1, 0)]
    };
    for r in 0..rows as isize {
        for c in 0..cols as isize {
            let src = (r as usize) * cols + c as usize;
            for &(dr, dc) in offsets {
                let (nr, nc) = (r + dr, c + dc);
                if nr < 0 || nc < 0 || nr >= rows as isize || nc >= cols as isize {
                    continue;
                }
                let dst = (nr as usize) * cols + nc as usize;
                let diagonal = dr != 0 && dc != 0;
                let mut cost = field.value(nr as usize, nc as usize);
                if diagonal {
                    cost *= std::f64::consts::SQRT_2;
                }
                edges.push((src, dst, 1.0 / cost, cost));
            }
        }
    }
    let mut graph = Graph::from_edges(n, &edges, false)?;
    graph.grid = Some(GridShape {
        rows,
        cols,
        diagonals,
    });
    Ok(graph)
}

/// The number of directed edges a rows x cols grid must contain.
pub fn grid_edge_count(rows: usize, cols: usize, diagonals: bool) -> usize {
    let horizontal = rows * cols.saturating_sub(1);
    let vertical = cols * rows.saturating_sub(1);
    let diagonal = if diagonals {
        2 * rows.saturating_sub(1) * cols.saturating_sub(1)
    } else {
        0
    };
    2 * (horizontal + vertical + diagonal)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn triangle() -> Graph {
        Graph::from_edges(
            3,
            &[
                (0, 1, 1.0, 1.0),
                (0, 2, 1.0, 1.0),
                (1, 2, 1.0, 1.0),
            ],
            true,
        )
        .unwrap()
    }

    #[test]
    fn triangle_reference_transitions() {
        let p = triangle().reference_transitions().unwrap();
        assert_relative_eq!(p[(0, 1)], 0.5);
        assert_relative_eq!(p[(0, 2)], 0.5);
        assert_relative_eq!(p[(1, 2)], 1.0);
        assert_eq!(p.row(2).iter().copied().sum::<f64>(), 0.0);
    }

    #[test]
    fn transition_rows_normalize() {
        let g = Graph::from_edges(3, &[(0, 1, 1.0, 1.0), (0, 2, 3.0, 1.0), (1, 0, 2.0, 1.0), (2, 0, 1.0, 1.0)], false)
            .unwrap();
        let p = g.reference_transitions().unwrap();
        assert_relative_eq!(p[(0, 1)], 0.25);
        assert_relative_eq!(p[(0, 2)], 0.75);
        for i in 0..3 {
            assert_relative_eq!(p.row(i).iter().sum::<f64>(), 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn rejects_invalid_edges() {
        assert!(matches!(
            Graph::from_edges(2, &[(0, 0, 1.0, 1.0)], true),
            Err(Error::SelfLoop { node: 0 })
        ));
        assert!(matches!(
            Graph::from_edges(2, &[(0, 1, 1.0, 1.0), (0, 1, 2.0, 1.0)], true),
            Err(Error::DuplicateEdge { src: 0, dst: 1 })
        ));
        assert!(matches!(
            Graph::from_edges(2, &[(0, 3, 1.0, 1.0)], true),
            Err(Error::NodeOutOfRange { node: 3, n: 2 })
        ));
        assert!(matches!(
            Graph::from_edges(2, &[(0, 1, -1.0, 1.0)], true),
            Err(Error::NonPositiveWeight { what: "affinity", .. })
        ));
        assert!(matches!(
            Graph::from_edges(2, &[(0, 1, 1.0, 0.0)], true),
            Err(Error::NonPositiveWeight { what: "cost", .. })
        ));
    }

    #[test]
    fn sink_rejected_without_flag() {
        let edges = [(0, 1, 1.0, 1.0)];
        assert!(matches!(
            Graph::from_edges(2, &edges, false),
            Err(Error::SinkNode { node: 1 })
        ));
        let g = Graph::from_edges(2, &edges, true).unwrap();
        assert_eq!(g.out_degree(1), 0);
    }

    #[test]
    fn grid_2x2_with_diagonals() {
        let g = build_grid(&CostField::uniform(2, 2, 1.0).unwrap(), true).unwrap();
        assert_eq!(g.node_count(), 4);
        assert_eq!(g.edge_count(), 12);
        assert_eq!(g.edge_count(), grid_edge_count(2, 2, true));
        let e = g.edge_index(0, 3).unwrap();
        assert_relative_eq!(g.cost[e], std::f64::consts::SQRT_2);
        assert_relative_eq!(g.affinity[e], 1.0 / std::f64::consts::SQRT_2);
        let e = g.edge_index(0, 1).unwrap();
        assert_relative_eq!(g.cost[e], 1.0);
    }

    #[test]
    fn grid_1x2() {
        let g = build_grid(&CostField::uniform(1, 2, 1.0).unwrap(), true).unwrap();
        assert_eq!(g.node_count(), 2);
        assert_eq!(g.edge_count(), 2);
        for (_, _, _, cost) in g.edges() {
            assert_relative_eq!(cost, 1.0);
        }
    }

    #[test]
    fn grid_20x20_uniform() {
        let g = build_grid(&CostField::uniform(20, 20, 1.0).unwrap(), true).unwrap();
        assert_eq!(g.node_count(), 400);
        assert_eq!(g.edge_count(), grid_edge_count(20, 20, true));
        // interior node
        assert_eq!(g.out_degree(21), 8);
        // corner and edge nodes
        assert_eq!(g.out_degree(0), 3);
        assert_eq!(g.out_degree(1), 5);
    }

    #[test]
    fn grid_edge_counts_match_combinatorics() {
        for &(r, c) in &[(1, 2), (2, 2), (3, 5), (4, 4), (7, 3)] {
            for &diag in &[false, true] {
                let g = build_grid(&CostField::uniform(r, c, 0.7).unwrap(), diag).unwrap();
                assert_eq!(g.edge_count(), grid_edge_count(r, c, diag), "{r}x{c} diag={diag}");
            }
        }
    }

    #[test]
    fn grid_costs_follow_destination_pixel() {
        let field = CostField::new(1, 3, vec![1.0, 2.0, 4.0]).unwrap();
        let g = build_grid(&field, false).unwrap();
        let e01 = g.edge_index(0, 1).unwrap();
        let e10 = g.edge_index(1, 0).unwrap();
        assert_relative_eq!(g.cost[e01], 2.0);
        assert_relative_eq!(g.cost[e10], 1.0);
        assert_relative_eq!(g.affinity[e01], 0.5);
    }

    #[test]
    fn landscape_zero_amplitude_is_flat() {
        let params = LandscapeParams {
            amplitude: 0.0,
            ..LandscapeParams::default()
        };
        let field = gaussian_landscape(6, 6, &params, 7).unwrap();
        for &v in field.values() {
            assert_relative_eq!(v, 0.5);
        }
    }

    #[test]
    fn landscape_is_seed_deterministic() {
        let params = LandscapeParams::default();
        let a = gaussian_landscape(20, 20, &params, 42).unwrap();
        let b = gaussian_landscape(20, 20, &params, 42).unwrap();
        assert_eq!(a, b);
        let c = gaussian_landscape(20, 20, &params, 43).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn landscape_default_straddles_base() {
        let field = gaussian_landscape(20, 20, &LandscapeParams::default(), 11).unwrap();
        let min = field.values().iter().cloned().fold(f64::INFINITY, f64::min);
        let max = field.values().iter().cloned().fold(0.0, f64::max);
        assert!(min < 0.5, "min {min}");
        assert!(max > 0.5, "max {max}");
        assert!(min >= 0.05);
    }

    #[test]
    fn edge_list_round_trip() {
        let g = triangle();
        let mut buf = Vec::new();
        g.save_edge_list(&mut buf).unwrap();
        let loaded = Graph::load_edge_list(&buf[..]).unwrap();
        assert_eq!(loaded.node_count(), g.node_count());
        let a: Vec<_> = g.edges().collect();
        let b: Vec<_> = loaded.edges().collect();
        assert_eq!(a, b);
    }

    #[test]
    fn edge_list_single_row() {
        let g = Graph::load_edge_list("src,dst,affinity,cost\n0,1,1.0,1.0\n".as_bytes()).unwrap();
        assert_eq!(g.node_count(), 2);
        assert_eq!(g.edge_count(), 1);
    }

    #[test]
    fn edge_list_errors_carry_line_numbers() {
        let dup = "src,dst,affinity,cost\n0,1,1.0,1.0\n0,1,2.0,1.0\n";
        match Graph::load_edge_list(dup.as_bytes()) {
            Err(Error::EdgeList { line, .. }) => assert_eq!(line, 3),
            other => panic!("expected duplicate-edge error, got {other:?}"),
        }
        let selfloop = "src,dst,affinity,cost\n2,2,1.0,1.0\n";
        match Graph::load_edge_list(selfloop.as_bytes()) {
            Err(Error::EdgeList { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected self-loop error, got {other:?}"),
        }
        let malformed = "src,dst,affinity,cost\n0,1,abc,1.0\n";
        assert!(matches!(
            Graph::load_edge_list(malformed.as_bytes()),
            Err(Error::EdgeList { line: 2, .. })
        ));
        let negative = "src,dst,affinity,cost\n0,1,1.0,-3\n";
        assert!(matches!(
            Graph::load_edge_list(negative.as_bytes()),
            Err(Error::EdgeList { line: 2, .. })
        ));
    }

    #[test]
    fn raster_round_trip() {
        let field = gaussian_landscape(5, 7, &LandscapeParams::default(), 3).unwrap();
        let mut buf = Vec::new();
        field.write_raster(&mut buf).unwrap();
        let loaded = CostField::read_raster(&buf[..]).unwrap();
        assert_eq!(field, loaded);
    }

    #[test]
    fn raster_rejects_ragged_rows() {
        let text = "1.0 2.0\n3.0\n";
        assert!(matches!(
            CostField::read_raster(text.as_bytes()),
            Err(Error::Raster { line: 2, .. })
        ));
    }

    #[test]
    fn hop_distance_and_connectivity() {
        let g = triangle();
        assert_eq!(g.hop_distance(0, 2), Some(1));
        assert_eq!(g.hop_distance(1, 2), Some(1));
        assert_eq!(g.hop_distance(2, 0), None);
        assert!(!g.is_strongly_connected());
        let cycle = Graph::from_edges(
            3,
            &[(0, 1, 1.0, 1.0), (1, 2, 1.0, 1.0), (2, 0, 1.0, 1.0)],
            false,
        )
        .unwrap();
        assert!(cycle.is_strongly_connected());
        assert_eq!(cycle.hop_distance(0, 2), Some(2));
    }

    #[test]
    fn min_cost_to_target_picks_the_cheap_detour() {
        // Direct hop costs 5; the two-edge detour costs 3.
        let g = Graph::from_edges(
            4,
            &[
                (0, 2, 1.0, 5.0),
                (0, 1, 1.0, 1.0),
                (1, 2, 1.0, 2.0),
                (3, 0, 1.0, 1.0),
            ],
            true,
        )
        .unwrap();
        let dist = g.min_cost_to_target(2).unwrap();
        assert_eq!(dist[0], 3.0);
        assert_eq!(dist[1], 2.0);
        assert_eq!(dist[2], 0.0);
        assert_eq!(dist[3], 4.0);
        let from_sink = g.min_cost_to_target(3).unwrap();
        assert!(from_sink[0].is_infinite());
        assert_eq!(from_sink[3], 0.0);
        assert!(g.min_cost_to_target(9).is_err());
    }

    #[test]
    fn cost_replacement_preserves_topology() {
        let g = triangle();
        let swapped = g.with_costs(&[3.0, 1.0, 0.5]).unwrap();
        assert_eq!(swapped.node_count(), g.node_count());
        let costs: Vec<f64> = swapped.edges().map(|(.., c)| c).collect();
        assert_eq!(costs, vec![3.0, 1.0, 0.5]);
        assert!(g.with_costs(&[1.0, 2.0]).is_err());
        assert!(g.with_costs(&[1.0, -1.0, 2.0]).is_err());
        assert!(g.with_costs(&[1.0, f64::NAN, 2.0]).is_err());
    }
}
