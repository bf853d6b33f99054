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

//! Weighted block-chain power series.
//!
//! Incomplete-observation likelihoods are sums over all path lengths k of
//! weight(k) times one entry of the k-th power of a block upper-bidiagonal
//! operator: M+1 copies of the target-absorbed likelihood matrix on the
//! diagonal, with one coupling block per observed item feeding each copy
//! into the next. The operator is never materialized. A row vector split
//! into M+1 per-copy segments ("lanes") is propagated edge by edge, and
//! the target component of the last lane is harvested each step.
//!
//! Each lane carries its own power-of-two exponent so that segments whose
//! magnitudes span hundreds of orders are represented exactly; rescaling
//! multiplies by powers of two only, so it never changes the computed sum.
//!
//! Truncation is certified, not guessed: the total future harvest of the
//! current state is bounded by an exact linear functional (one absorbed
//! solve per lane, built lazily), and the series stops only when that
//! bound, scaled by the next term weight, drops below the tolerance times
//! the accumulated value. A state whose functional is exactly zero can
//! never contribute again, which terminates impossible observations early.

use nalgebra::{DVector, Dyn};
#[cfg(test)]
use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::rsp::absorbed_matrix;

const LN_2: f64 = std::f64::consts::LN_2;
/// Stored lane magnitudes are kept inside [threshold, 1/threshold].
const SCALE_BAND: f64 = 1e250;
/// Lanes whose exponents drift this far apart are re-framed before the
/// coupling multiply so scale-conversion factors stay representable.
const ALIGN_BITS: i64 = 900;
/// Steps between certification attempts of the stopping rule.
const CERT_INTERVAL: usize = 16;

/// Controls for series truncation.
#[derive(Debug, Clone, Copy)]
pub struct SeriesConfig {
    /// Stop once the certified tail bound falls below this fraction of the
    /// accumulated sum.
    pub tol: f64,
    /// Hard cap on the number of series terms.
    pub max_terms: usize,
    /// Lane magnitudes outside [threshold, 1/threshold] trigger a
    /// power-of-two rescale.
    pub rescale_threshold: f64,
}

impl Default for SeriesConfig {
    fn default() -> Self {
        Self {
            tol: 1e-12,
            max_terms: 1_000_000,
            rescale_threshold: 1e-250,
        }
    }
}

impl SeriesConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0 && self.tol < 1.0) {
            return Err(Error::BadParameter {
                what: format!("series tolerance must be in (0, 1), got {}", self.tol),
            });
        }
        if self.max_terms == 0 {
            return Err(Error::BadParameter {
                what: "series term cap must be at least 1".into(),
            });
        }
        if !(self.rescale_threshold > 0.0 && self.rescale_threshold < 1.0) {
            return Err(Error::BadParameter {
                what: format!(
                    "rescale threshold must be in (0, 1), got {}",
                    self.rescale_threshold
                ),
            });
        }
        Ok(())
    }
}

/// Initial lane-0 state of the chain.
#[derive(Debug, Clone, Copy)]
pub(crate) enum Seed {
    /// Unit mass at one node.
    Unit(usize),
    /// The node's outgoing likelihood weights (the walk after its first
    /// step from that node).
    WeightedRow(usize),
}

/// One observed item: the block feeding a lane into the next.
#[derive(Debug, Clone, Copy)]
pub(crate) enum Coupling {
    /// Single-entry block: the walk traverses this exact edge.
    Edge { src: usize, dst: usize },
    /// Row block: the walk leaves this node by any edge.
    NodeRow { node: usize },
}

/// Per-term weight as a function of the step count k.
#[derive(Debug, Clone, Copy)]
pub(crate) enum WeightLaw {
    /// 1/k.
    InvK,
    /// 1/(C(k, m)·k), defined from k = m.
    ChooseInvK { m: usize },
    /// q^k. Production callers evaluate geometric sums by a direct linear
    /// solve; this law remains the independent series route it is checked
    /// against.
    #[cfg_attr(not(test), allow(dead_code))]
    Geometric { q: f64 },
}

/// Certified-negligible margin on likelihood ratios: a caller dividing the
/// series by a partition value sets the chain's `ln_floor` to that log
/// denominator plus this, so a quotient certifiably below e^{−700} (the
/// positive-double floor) is reported by its bound instead of iterated.
pub(crate) const NEGLIGIBLE_RATIO_LOG: f64 = -700.0;

/// Full description of one weighted chain sum.
pub(crate) struct ChainSpec<'a> {
    pub t: usize,
    pub seed: Seed,
    pub couplings: &'a [Coupling],
    pub law: WeightLaw,
    /// Early-out cutoff: once no mass has been harvested and the certified
    /// remainder sits below this log value, the remainder is returned as
    /// the result. −∞ disables the cutoff.
    pub ln_floor: f64,
}

/// Factorization of I − W with row t of W zeroed, shared by chain
/// evaluations against the same target.
pub(crate) struct AbsorbedLu {
    lu: nalgebra::linalg::LU<f64, Dyn, Dyn>,
}

impl AbsorbedLu {
    pub(crate) fn new(graph: &Graph, weights: &[f64], t: usize) -> Self {
        Self {
            lu: absorbed_matrix(graph, weights, t).lu(),
        }
    }

    pub(crate) fn solve(&self, rhs: &DVector<f64>) -> Result<DVector<f64>> {
        self.lu
            .solve(rhs)
            .ok_or(Error::SingularSystem { what: "absorbed chain system" })
    }
}

/// log(a + b) for values stored as logs.
pub(crate) fn ln_add(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// v · 2^e, split so intermediate factors stay representable for
/// |e| up to ~2100.
fn apply_exp2(v: f64, e: i64) -> f64 {
    if v == 0.0 || e == 0 {
        return v;
    }
    debug_assert!(e.abs() <= 2100, "scale jump {e} out of design range");
    let h1 = (e / 2).clamp(-1070, 1070) as i32;
    let h2 = (e - h1 as i64).clamp(-1070, 1070) as i32;
    v * 2f64.powi(h1) * 2f64.powi(h2)
}

enum ResolvedCoupling {
    Edge { src: usize, edge: usize },
    Row { node: usize },
}

/// Exact bound on the future harvest of a chain state: values[i, m] is the
/// total weight that unit mass at node i of lane m will ever deliver to
/// the harvested component, stored normalized per lane with a log scale.
struct TailFunctional {
    values: Vec<f64>,
    ln_scale: Vec<f64>,
}

fn build_tail_functional(
    graph: &Graph,
    weights: &[f64],
    t: usize,
    couplings: &[ResolvedCoupling],
    lu: &AbsorbedLu,
) -> Result<TailFunctional> {
    let n = graph.node_count();
    let lanes = couplings.len() + 1;
    let mut values = vec![0.0; n * lanes];
    let mut ln_scale = vec![f64::NEG_INFINITY; lanes];
    let mut e_t = DVector::<f64>::zeros(n);
    e_t[t] = 1.0;
    // Last lane: the absorbed path-weight vector. Arriving at the target
    // is worth exactly one harvested unit, so the arrival-value vector is
    // x itself; mass already sitting at the target is spent.
    let x = lu.solve(&e_t)?.map(|v| v.max(0.0));
    let mut arrival = x;
    let mx = arrival.max();
    if mx > 0.0 {
        let lane = lanes - 1;
        ln_scale[lane] = mx.ln();
        for i in 0..n {
            if i != t {
                values[i * lanes + lane] = arrival[i] / mx;
            }
        }
        let mut scaled = arrival.clone();
        scaled /= mx;
        arrival = scaled;
    } else {
        return Ok(TailFunctional { values, ln_scale });
    }
    for m in (0..couplings.len()).rev() {
        // Value of sitting in lane m: reach the coupling source, step
        // through the coupling block, and collect lane m+1's arrival value.
        let mut rhs = DVector::<f64>::zeros(n);
        match couplings[m] {
            ResolvedCoupling::Edge { src, edge } => {
                let dst = graph.col[edge] as usize;
                rhs[src] = weights[edge] * arrival[dst];
            }
            ResolvedCoupling::Row { node } => {
                let mut acc = 0.0;
                for e in graph.row_ptr[node]..graph.row_ptr[node + 1] {
                    acc += weights[e] * arrival[graph.col[e] as usize];
                }
                rhs[node] = acc;
            }
        }
        let g = lu.solve(&rhs)?.map(|v| v.max(0.0));
        let mx = g.max();
        if mx == 0.0 {
            // Nothing below this lane can ever reach the harvest.
            break;
        }
        ln_scale[m] = ln_scale[m + 1] + mx.ln();
        for i in 0..n {
            values[i * lanes + m] = g[i] / mx;
        }
        let mut scaled = g;
        scaled /= mx;
        // Below the last lane, arriving and sitting are worth the same.
        arrival = scaled;
    }
    Ok(TailFunctional { values, ln_scale })
}

struct WeightState {
    law: WeightLaw,
    /// ln C(k, m) maintained incrementally for the binomial law.
    ln_choose: f64,
}

impl WeightState {
    fn new(law: WeightLaw) -> Self {
        Self { law, ln_choose: 0.0 }
    }

    /// Called once per step with increasing k ≥ start; returns ln weight(k).
    fn advance(&mut self, k: usize, start: usize) -> f64 {
        match self.law {
            WeightLaw::InvK => -(k as f64).ln(),
            WeightLaw::ChooseInvK { m } => {
                if k > start {
                    self.ln_choose += (k as f64 / (k - m) as f64).ln();
                }
                -self.ln_choose - (k as f64).ln()
            }
            WeightLaw::Geometric { q } => k as f64 * q.ln(),
        }
    }

    /// ln weight(k+1) without disturbing the incremental state.
    fn peek_next(&self, k: usize) -> f64 {
        match self.law {
            WeightLaw::InvK => -((k + 1) as f64).ln(),
            WeightLaw::ChooseInvK { m } => {
                let ln_choose_next = self.ln_choose + ((k + 1) as f64 / (k + 1 - m) as f64).ln();
                -ln_choose_next - ((k + 1) as f64).ln()
            }
            WeightLaw::Geometric { q } => (k + 1) as f64 * q.ln(),
        }
    }
}

/// Evaluates ln Σ_k weight(k) · [chain]_k for one observation chain.
/// Returns −∞ for observations the path distribution cannot produce.
pub(crate) fn chain_series_log(
    graph: &Graph,
    weights: &[f64],
    spec: &ChainSpec,
    cfg: &SeriesConfig,
    lu: &AbsorbedLu,
) -> Result<f64> {
    cfg.validate()?;
    let n = graph.node_count();
    let t = spec.t;
    if t >= n {
        return Err(Error::NodeOutOfRange { node: t, n });
    }
    if spec.couplings.is_empty() {
        return Err(Error::BadParameter {
            what: "a chain needs at least one observed item".into(),
        });
    }
    if let WeightLaw::Geometric { q } = spec.law {
        if !(q > 0.0 && q < 1.0) {
            return Err(Error::BadParameter {
                what: format!("geometric ratio must be in (0, 1), got {q}"),
            });
        }
    }
    let couplings: Vec<ResolvedCoupling> = spec
        .couplings
        .iter()
        .map(|c| match *c {
            Coupling::Edge { src, dst } => {
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
                let edge = graph.edge_index(src, dst).ok_or(Error::BadObservation {
                    reason: format!("observed edge ({src}, {dst}) is not in the graph"),
                })?;
                Ok(ResolvedCoupling::Edge { src, edge })
            }
            Coupling::NodeRow { node } => {
                if node >= n {
                    return Err(Error::NodeOutOfRange { node, n });
                }
                if node == t {
                    return Err(Error::BadObservation {
                        reason: format!("observed node equals the target node {t}"),
                    });
                }
                Ok(ResolvedCoupling::Row { node })
            }
        })
        .collect::<Result<_>>()?;
    let lanes = couplings.len() + 1;
    let start_k = couplings.len();

    let mut cur = vec![0.0; n * lanes];
    match spec.seed {
        Seed::Unit(s) => {
            if s >= n {
                return Err(Error::NodeOutOfRange { node: s, n });
            }
            cur[s * lanes] = 1.0;
        }
        Seed::WeightedRow(s) => {
            if s >= n {
                return Err(Error::NodeOutOfRange { node: s, n });
            }
            for e in graph.row_ptr[s]..graph.row_ptr[s + 1] {
                cur[graph.col[e] as usize * lanes] += weights[e];
            }
        }
    }
    let mut next = vec![0.0; n * lanes];
    let mut exps = vec![0i64; lanes];
    let mut weight_state = WeightState::new(spec.law);
    let mut accum = f64::NEG_INFINITY;
    let mut tail: Option<TailFunctional> = None;
    let mut last_cert = 0usize;
    let band_lo = cfg.rescale_threshold;
    let band_hi = SCALE_BAND.min(1.0 / cfg.rescale_threshold);

    let certified_tail = |cur: &[f64],
                              exps: &[i64],
                              tail: &mut Option<TailFunctional>|
     -> Result<f64> {
        if tail.is_none() {
            *tail = Some(build_tail_functional(graph, weights, t, &couplings, lu)?);
        }
        let f = tail.as_ref().expect("just built");
        let mut ln_u = f64::NEG_INFINITY;
        for m in 0..lanes {
            if f.ln_scale[m] == f64::NEG_INFINITY {
                continue;
            }
            let mut dot = 0.0;
            for i in 0..n {
                dot += cur[i * lanes + m].max(0.0) * f.values[i * lanes + m];
            }
            if dot > 0.0 {
                ln_u = ln_add(ln_u, dot.ln() + exps[m] as f64 * LN_2 + f.ln_scale[m]);
            }
        }
        Ok(ln_u)
    };

    for k in 1..=cfg.max_terms {
        // Re-frame lanes whose scale lags far behind their feeder so the
        // conversion factor in the coupling multiply stays representable.
        for m in 1..lanes {
            let delta = exps[m - 1] - exps[m];
            if delta > ALIGN_BITS {
                for i in 0..n {
                    let v = &mut cur[i * lanes + m];
                    *v = apply_exp2(*v, -delta);
                }
                exps[m] = exps[m - 1];
            }
        }
        next.fill(0.0);
        // Diagonal blocks: one absorbed-matrix multiply applied to every
        // lane at once (lane values for one node are contiguous).
        for i in 0..n {
            if i == t {
                continue;
            }
            let row = i * lanes;
            for e in graph.row_ptr[i]..graph.row_ptr[i + 1] {
                let w = weights[e];
                let dst = graph.col[e] as usize * lanes;
                for m in 0..lanes {
                    next[dst + m] += w * cur[row + m];
                }
            }
        }
        // Coupling blocks: lane m−1 feeds lane m through its observed item.
        for (idx, c) in couplings.iter().enumerate() {
            let m = idx + 1;
            let shift = exps[m - 1] - exps[m];
            match *c {
                ResolvedCoupling::Edge { src, edge } => {
                    let v = cur[src * lanes + m - 1];
                    if v != 0.0 {
                        let dst = graph.col[edge] as usize;
                        next[dst * lanes + m] += apply_exp2(weights[edge] * v, shift);
                    }
                }
                ResolvedCoupling::Row { node } => {
                    let v = cur[node * lanes + m - 1];
                    if v != 0.0 {
                        let scaled = apply_exp2(v, shift);
                        for e in graph.row_ptr[node]..graph.row_ptr[node + 1] {
                            next[graph.col[e] as usize * lanes + m] += weights[e] * scaled;
                        }
                    }
                }
            }
        }
        std::mem::swap(&mut cur, &mut next);

        if k >= start_k {
            let ln_w = weight_state.advance(k, start_k);
            let raw = cur[t * lanes + lanes - 1];
            if raw > 0.0 {
                accum = ln_add(accum, raw.ln() + exps[lanes - 1] as f64 * LN_2 + ln_w);
            }
        }

        // One pass: per-lane maxima for band rescaling plus liveness.
        let mut lane_max = vec![0.0f64; lanes];
        for i in 0..n {
            for m in 0..lanes {
                let v = cur[i * lanes + m].abs();
                if v > lane_max[m] {
                    lane_max[m] = v;
                }
            }
        }
        if lane_max.iter().all(|&v| v == 0.0) {
            // The state died out entirely: the sum is exact.
            return Ok(accum);
        }
        for m in 0..lanes {
            let mx = lane_max[m];
            if mx > 0.0 && (mx < band_lo || mx > band_hi) {
                let shift = mx.log2().floor() as i64;
                for i in 0..n {
                    let v = &mut cur[i * lanes + m];
                    *v = apply_exp2(*v, -shift);
                }
                exps[m] += shift;
            }
        }

        if k >= start_k && k - last_cert >= CERT_INTERVAL {
            last_cert = k;
            let ln_u = certified_tail(&cur, &exps, &mut tail)?;
            if ln_u == f64::NEG_INFINITY {
                // No remaining state can ever reach the harvest.
                return Ok(accum);
            }
            let ln_tail = weight_state.peek_next(k) + ln_u;
            if accum > f64::NEG_INFINITY {
                if ln_tail < cfg.tol.ln() + accum {
                    return Ok(accum);
                }
            } else if ln_tail < spec.ln_floor {
                // Nothing harvested and the certified remainder is below
                // the caller's floor. This arises at extreme β when every
                // observed item sits far off the likely corridors, where
                // within-lane dynamic range exceeds the float format; the
                // certified bound is the best statement available.
                return Ok(ln_tail);
            }
        }
    }
    let ln_u = certified_tail(&cur, &exps, &mut tail)?;
    let tail_log = weight_state.peek_next(cfg.max_terms) + ln_u;
    Err(Error::SeriesBudget {
        terms: cfg.max_terms,
        partial_log: accum,
        tail_log,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rsp::RspContext;
    use approx::assert_relative_eq;

    const LN2: f64 = std::f64::consts::LN_2;

    fn triangle() -> Graph {
        Graph::from_edges(
            3,
            &[(0, 1, 1.0, 1.0), (0, 2, 1.0, 1.0), (1, 2, 1.0, 1.0)],
            true,
        )
        .unwrap()
    }

    fn ring(n: usize) -> Graph {
        let edges: Vec<(usize, usize, f64, f64)> =
            (0..n).map(|i| (i, (i + 1) % n, 1.0, 1.0)).collect();
        Graph::from_edges(n, &edges, false).unwrap()
    }

    fn run(
        g: &Graph,
        beta: f64,
        t: usize,
        seed: Seed,
        couplings: &[Coupling],
        law: WeightLaw,
        cfg: &SeriesConfig,
    ) -> Result<f64> {
        let ctx = RspContext::new(g, beta).unwrap();
        let lu = AbsorbedLu::new(g, ctx.likelihood_weights(), t);
        chain_series_log(
            g,
            ctx.likelihood_weights(),
            &ChainSpec { t, seed, couplings, law, ln_floor: f64::NEG_INFINITY },
            cfg,
            &lu,
        )
    }

    #[test]
    fn single_edge_chains_on_triangle() {
        // Direct edge (0, 2): only the one-step path carries it, weight
        // 1/1, raw value w_02 = 1/4.
        let v = run(
            &triangle(),
            LN2,
            2,
            Seed::Unit(0),
            &[Coupling::Edge { src: 0, dst: 2 }],
            WeightLaw::InvK,
            &SeriesConfig::default(),
        )
        .unwrap();
        assert_relative_eq!(v, 0.25f64.ln(), epsilon = 1e-13);

        // Edge (0, 1): the two-step path, weight 1/2, raw w_01 · w_12.
        let v = run(
            &triangle(),
            LN2,
            2,
            Seed::Unit(0),
            &[Coupling::Edge { src: 0, dst: 1 }],
            WeightLaw::InvK,
            &SeriesConfig::default(),
        )
        .unwrap();
        assert_relative_eq!(v, 0.0625f64.ln(), epsilon = 1e-13);
    }

    #[test]
    fn acyclic_chain_terminates_exactly() {
        // On this acyclic fixture all mass is gone after three steps, so
        // even a huge term cap finishes immediately with the exact sum.
        let cfg = SeriesConfig {
            max_terms: 1_000_000_000,
            ..SeriesConfig::default()
        };
        let v = run(
            &triangle(),
            LN2,
            2,
            Seed::Unit(0),
            &[Coupling::Edge { src: 1, dst: 2 }],
            WeightLaw::InvK,
            &cfg,
        )
        .unwrap();
        assert_relative_eq!(v, 0.0625f64.ln(), epsilon = 1e-13);
    }

    #[test]
    fn forced_rescaling_changes_nothing() {
        // A rescale band of [0.5, 2] forces power-of-two renormalization
        // on virtually every step; the result must be identical.
        let g = ring(6);
        let loose = SeriesConfig::default();
        let tight = SeriesConfig {
            rescale_threshold: 0.5,
            ..SeriesConfig::default()
        };
        for couplings in [
            vec![Coupling::Edge { src: 1, dst: 2 }],
            vec![Coupling::NodeRow { node: 2 }],
            vec![
                Coupling::Edge { src: 1, dst: 2 },
                Coupling::Edge { src: 3, dst: 4 },
            ],
        ] {
            let law = match couplings.len() {
                1 => WeightLaw::InvK,
                m => WeightLaw::ChooseInvK { m },
            };
            let a = run(&g, 0.4, 5, Seed::Unit(0), &couplings, law, &loose).unwrap();
            let b = run(&g, 0.4, 5, Seed::Unit(0), &couplings, law, &tight).unwrap();
            assert_relative_eq!(a, b, epsilon = 1e-12);
        }
    }

    #[test]
    fn impossible_order_terminates_with_zero() {
        // On a one-way ring the second edge can never follow the first in
        // a single pass to the target; certification must notice the dead
        // state and stop long before the term cap.
        let g = ring(5);
        let cfg = SeriesConfig {
            max_terms: 500,
            ..SeriesConfig::default()
        };
        let v = run(
            &g,
            0.7,
            4,
            Seed::Unit(0),
            &[
                Coupling::Edge { src: 2, dst: 3 },
                Coupling::Edge { src: 0, dst: 1 },
            ],
            WeightLaw::ChooseInvK { m: 2 },
            &cfg,
        )
        .unwrap();
        assert_eq!(v, f64::NEG_INFINITY);
    }

    #[test]
    fn budget_error_carries_partial_and_tail() {
        let g = ring(6);
        let cfg = SeriesConfig {
            max_terms: 3,
            ..SeriesConfig::default()
        };
        match run(
            &g,
            0.5,
            5,
            Seed::Unit(0),
            &[Coupling::Edge { src: 0, dst: 1 }],
            WeightLaw::InvK,
            &cfg,
        ) {
            Err(Error::SeriesBudget { terms, partial_log, tail_log }) => {
                assert_eq!(terms, 3);
                assert!(partial_log.is_finite() || partial_log == f64::NEG_INFINITY);
                assert!(tail_log > f64::NEG_INFINITY, "live mass must bound the tail");
            }
            other => panic!("expected budget error, got {other:?}"),
        }
    }

    #[test]
    fn two_couplings_match_dense_block_power() {
        // Dense cross-check of the propagation: build the full
        // (M+1)n-square block operator for M = 2 and sum its weighted
        // powers directly.
        let g = Graph::from_edges(
            4,
            &[
                (0, 1, 1.0, 0.7),
                (1, 2, 0.5, 1.1),
                (2, 0, 1.0, 0.9),
                (1, 3, 1.0, 1.3),
                (2, 3, 2.0, 0.8),
                (3, 1, 1.0, 1.0),
            ],
            false,
        )
        .unwrap();
        let beta = 0.6;
        let t = 3;
        let ctx = RspContext::new(&g, beta).unwrap();
        let w = ctx.likelihood_weights();
        let n = 4;
        let e1 = (0usize, 1usize);
        let e2 = (1usize, 2usize);

        let mut wabs = DMatrix::<f64>::zeros(n, n);
        for (e, (i, j, _, _)) in g.edges().enumerate() {
            if i != t {
                wabs[(i, j)] = w[e];
            }
        }
        let mut b1 = DMatrix::<f64>::zeros(n, n);
        b1[(e1.0, e1.1)] = w[g.edge_index(e1.0, e1.1).unwrap()];
        let mut b2 = DMatrix::<f64>::zeros(n, n);
        b2[(e2.0, e2.1)] = w[g.edge_index(e2.0, e2.1).unwrap()];

        let big = 3 * n;
        let mut q = DMatrix::<f64>::zeros(big, big);
        for blk in 0..3 {
            q.view_mut((blk * n, blk * n), (n, n)).copy_from(&wabs);
        }
        q.view_mut((0, n), (n, n)).copy_from(&b1);
        q.view_mut((n, 2 * n), (n, n)).copy_from(&b2);

        let mut power = DMatrix::<f64>::identity(big, big);
        let mut dense_sum = 0.0;
        let mut ln_choose = 0.0;
        for k in 1..=400 {
            power = &power * &q;
            if k >= 2 {
                if k > 2 {
                    ln_choose += (k as f64 / (k - 2) as f64).ln();
                }
                let weight = (-ln_choose - (k as f64).ln()).exp();
                dense_sum += weight * power[(0, 2 * n + t)];
            }
        }

        let v = run(
            &g,
            beta,
            t,
            Seed::Unit(0),
            &[
                Coupling::Edge { src: e1.0, dst: e1.1 },
                Coupling::Edge { src: e2.0, dst: e2.1 },
            ],
            WeightLaw::ChooseInvK { m: 2 },
            &SeriesConfig::default(),
        )
        .unwrap();
        assert_relative_eq!(v.exp(), dense_sum, max_relative = 1e-10);
    }

    #[test]
    fn weighted_row_seed_shifts_the_step_count() {
        // Forced four-node line, observed node 1, seeded by the first
        // step: the single path has engine length 2 and weight 1/2, and
        // the raw value carries all three edge weights (the seed row
        // already includes the first).
        let g = Graph::from_edges(
            4,
            &[(0, 1, 1.0, 1.0), (1, 2, 1.0, 1.0), (2, 3, 1.0, 1.0)],
            true,
        )
        .unwrap();
        let ctx = RspContext::new(&g, 0.9).unwrap();
        let w = ctx.likelihood_weights();
        let want = (w[0] * w[1] * w[2] / 2.0).ln();
        let v = run(
            &g,
            0.9,
            3,
            Seed::WeightedRow(0),
            &[Coupling::NodeRow { node: 1 }],
            WeightLaw::InvK,
            &SeriesConfig::default(),
        )
        .unwrap();
        assert_relative_eq!(v, want, epsilon = 1e-13);
    }

    #[test]
    fn geometric_law_sums_the_resolvent() {
        // Σ_k q^k [Q^k] entry equals the resolvent entry of the dense
        // block operator; cross-checked by direct truncated summation.
        let g = ring(5);
        let beta = 0.8;
        let t = 4;
        let q_ratio = 0.45f64;
        let ctx = RspContext::new(&g, beta).unwrap();
        let w = ctx.likelihood_weights();
        let n = 5;
        let mut wabs = DMatrix::<f64>::zeros(n, n);
        for (e, (i, j, _, _)) in g.edges().enumerate() {
            if i != t {
                wabs[(i, j)] = w[e];
            }
        }
        let mut b = DMatrix::<f64>::zeros(n, n);
        b[(1, 2)] = w[g.edge_index(1, 2).unwrap()];
        let big = 2 * n;
        let mut qm = DMatrix::<f64>::zeros(big, big);
        qm.view_mut((0, 0), (n, n)).copy_from(&wabs);
        qm.view_mut((n, n), (n, n)).copy_from(&wabs);
        qm.view_mut((0, n), (n, n)).copy_from(&b);
        let mut power = DMatrix::<f64>::identity(big, big);
        let mut dense = 0.0;
        for k in 1..=300 {
            power = &power * &qm;
            dense += q_ratio.powi(k) * power[(0, n + t)];
        }
        let v = run(
            &g,
            beta,
            t,
            Seed::Unit(0),
            &[Coupling::Edge { src: 1, dst: 2 }],
            WeightLaw::Geometric { q: q_ratio },
            &SeriesConfig::default(),
        )
        .unwrap();
        assert_relative_eq!(v.exp(), dense, max_relative = 1e-10);
    }

    #[test]
    fn bad_chain_inputs_are_rejected() {
        let g = triangle();
        assert!(matches!(
            run(
                &g,
                LN2,
                2,
                Seed::Unit(0),
                &[Coupling::Edge { src: 2, dst: 0 }],
                WeightLaw::InvK,
                &SeriesConfig::default(),
            ),
            Err(Error::BadObservation { .. })
        ));
        assert!(matches!(
            run(
                &g,
                LN2,
                2,
                Seed::Unit(0),
                &[Coupling::Edge { src: 1, dst: 0 }],
                WeightLaw::InvK,
                &SeriesConfig::default(),
            ),
            Err(Error::BadObservation { .. })
        ));
        assert!(matches!(
            run(&g, LN2, 2, Seed::Unit(0), &[], WeightLaw::InvK, &SeriesConfig::default()),
            Err(Error::BadParameter { .. })
        ));
        let bad = SeriesConfig { tol: 2.0, ..SeriesConfig::default() };
        assert!(bad.validate().is_err());
    }
}
