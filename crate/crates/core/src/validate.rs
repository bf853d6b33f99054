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

//! End-to-end recovery harness on 20x20 grid worlds.
//!
//! Each cell of the protocol fixes a generating β, draws 200 walks between
//! well-separated uniform endpoint pairs, re-estimates β from those walks
//! (either whole, or reduced to ordered interior-node subsamples), and
//! repeats ten times to get a mean and spread of the estimates. The
//! bundled [`ReferenceCell`] tables hold the recovery statistics this
//! protocol is expected to reproduce; a run passes a cell when its mean
//! lands within three reference standard deviations of either the
//! generating β or the reference mean.
//!
//! The subsample search is staged to keep its cost manageable: a coarse
//! log-spaced scan on a small prefix of the observations brackets the
//! optimum, then golden-section refinement on the full set pins it down,
//! widening the bracket again if the optimum presses against its edge.

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{build_grid, gaussian_landscape, CostField, Graph, LandscapeParams};
use crate::mle_complete::{mle_beta_complete, MleResult, MleStatus, DEFAULT_MLE_TOL};
use crate::mle_incomplete::{log_likelihood_incomplete_with, IncompleteOptions};
use crate::rsp::RspContext;
use crate::sampler::{
    sample_path, sample_separated_pair, subsample_nodes, Observation, TrajectorySet,
    SUBSAMPLE_CAP,
};
use crate::series::SeriesConfig;

/// One row of a reference table: the generating β and the mean and
/// standard deviation of its recovered estimates over ten repetitions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReferenceCell {
    pub beta: f64,
    pub mean: f64,
    pub sd: f64,
}

const fn cell(beta: f64, mean: f64, sd: f64) -> ReferenceCell {
    ReferenceCell { beta, mean, sd }
}

/// Whole-walk recovery on the uniform-cost grid.
pub const REFERENCE_COMPLETE_UNIFORM: [ReferenceCell; 4] = [
    cell(0.01, 0.00970, 0.00085),
    cell(0.1, 0.09785, 0.00497),
    cell(1.0, 1.01719, 0.03833),
    cell(5.0, 5.07901, 0.23531),
];

/// Whole-walk recovery on the Gaussian cost landscape.
pub const REFERENCE_COMPLETE_LANDSCAPE: [ReferenceCell; 4] = [
    cell(0.01, 0.01029, 0.00115),
    cell(0.1, 0.09956, 0.00392),
    cell(1.0, 0.99922, 0.02422),
    cell(5.0, 4.99453, 0.17301),
];

/// Interior-node-subsample recovery on the uniform-cost grid.
pub const REFERENCE_SUBSAMPLE_UNIFORM: [ReferenceCell; 4] = [
    cell(0.01, 0.00980, 0.00070),
    cell(0.1, 0.10117, 0.00704),
    cell(1.0, 1.01074, 0.07147),
    cell(5.0, 4.92557, 0.27878),
];

/// Interior-node-subsample recovery on the Gaussian cost landscape.
pub const REFERENCE_SUBSAMPLE_LANDSCAPE: [ReferenceCell; 4] = [
    cell(0.01, 0.00992, 0.00088),
    cell(0.1, 0.09433, 0.00807),
    cell(1.0, 0.98349, 0.03991),
    cell(5.0, 4.93601, 0.24915),
];

/// The uniform-cost world: a 20x20 grid, diagonal moves included, every
/// pixel costing 1 (so diagonal steps cost sqrt(2)).
pub fn uniform_grid_20() -> Result<Graph> {
    build_grid(&CostField::uniform(20, 20, 1.0)?, true)
}

/// The landscape world: a 20x20 grid over a seeded Gaussian cost raster
/// (base 0.5, five low and five high patches), diagonal moves included.
pub fn landscape_grid_20(seed: u64) -> Result<Graph> {
    build_grid(&gaussian_landscape(20, 20, &LandscapeParams::default(), seed)?, true)
}

/// Knobs of the recovery protocol. Defaults reproduce the reference
/// tables; smaller settings make cheap smoke runs.
#[derive(Debug, Clone)]
pub struct HarnessOptions {
    /// Walks drawn per repetition.
    pub paths_per_rep: usize,
    /// Independent repetitions per cell.
    pub reps: usize,
    /// Minimum hop separation of sampled endpoint pairs.
    pub min_hops: usize,
    /// Search bracket per cell: (β/factor, β·factor).
    pub bracket_factor: f64,
    /// Observations used in the coarse scan stage of the subsample search.
    pub scan_subset: usize,
    /// Scan grid size, refinement tolerance, and series controls for the
    /// subsample likelihood.
    pub incomplete: IncompleteOptions,
    /// Base seed; repetition r uses seed + r.
    pub seed: u64,
}

impl Default for HarnessOptions {
    fn default() -> Self {
        Self {
            paths_per_rep: 200,
            reps: 10,
            min_hops: 3,
            bracket_factor: 50.0,
            scan_subset: 50,
            incomplete: IncompleteOptions {
                series: SeriesConfig {
                    tol: 1e-6,
                    max_terms: 2_000_000,
                    ..SeriesConfig::default()
                },
                grid_points: 7,
                rel_tol: 1e-3,
                ..IncompleteOptions::default()
            },
            seed: 0,
        }
    }
}

/// Outcome of one protocol cell.
#[derive(Debug, Clone, Serialize)]
pub struct CellReport {
    pub beta_true: f64,
    /// One estimate per repetition.
    pub estimates: Vec<f64>,
    pub mean: f64,
    /// Sample standard deviation of the estimates.
    pub sd: f64,
    pub reference_mean: f64,
    pub reference_sd: f64,
    /// Repetitions whose search ended on the bracket edge.
    pub boundary_hits: usize,
}

impl CellReport {
    fn from_estimates(reference: &ReferenceCell, estimates: Vec<f64>, boundary_hits: usize) -> Self {
        let (mean, sd) = mean_sd(&estimates);
        CellReport {
            beta_true: reference.beta,
            estimates,
            mean,
            sd,
            reference_mean: reference.mean,
            reference_sd: reference.sd,
            boundary_hits,
        }
    }

    /// The run's mean lies within three reference deviations of the
    /// generating β.
    pub fn within_true_band(&self) -> bool {
        (self.mean - self.beta_true).abs() <= 3.0 * self.reference_sd
    }

    /// The run's mean lies within three reference deviations of the
    /// reference mean.
    pub fn within_reference_band(&self) -> bool {
        (self.mean - self.reference_mean).abs() <= 3.0 * self.reference_sd
    }

    pub fn passes(&self) -> bool {
        self.within_true_band() || self.within_reference_band()
    }
}

/// Sample mean and sample standard deviation.
pub(crate) fn mean_sd(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

fn cell_bracket(beta: f64, factor: f64) -> (f64, f64) {
    (beta / factor, beta * factor)
}

/// Draw one repetition's worth of walks at the generating β.
fn draw_walks(
    ctx: &RspContext,
    opts: &HarnessOptions,
    rng: &mut ChaCha12Rng,
) -> Result<Vec<crate::sampler::Trajectory>> {
    let graph = ctx.graph();
    let mut walks = Vec::with_capacity(opts.paths_per_rep);
    for _ in 0..opts.paths_per_rep {
        let (s, t) = sample_separated_pair(graph, opts.min_hops, rng)?;
        walks.push(sample_path(ctx, s, t, rng)?);
    }
    Ok(walks)
}

/// Run one whole-walk recovery cell: repeatedly draw walks at the
/// reference β and re-estimate it from them.
pub fn run_complete_cell(
    graph: &Graph,
    reference: &ReferenceCell,
    opts: &HarnessOptions,
) -> Result<CellReport> {
    let ctx = RspContext::new(graph, reference.beta)?;
    let bracket = cell_bracket(reference.beta, opts.bracket_factor);
    let mut estimates = Vec::with_capacity(opts.reps);
    let mut boundary_hits = 0;
    for rep in 0..opts.reps {
        let mut rng = ChaCha12Rng::seed_from_u64(opts.seed.wrapping_add(rep as u64));
        let mut set = TrajectorySet::default();
        for walk in draw_walks(&ctx, opts, &mut rng)? {
            set.push(Observation::complete(&walk));
        }
        let fit = mle_beta_complete(graph, &set, bracket, DEFAULT_MLE_TOL)?;
        if fit.status != MleStatus::Converged {
            boundary_hits += 1;
        }
        estimates.push(fit.beta_hat);
    }
    Ok(CellReport::from_estimates(reference, estimates, boundary_hits))
}

/// Run one subsample recovery cell: walks are reduced to ordered
/// interior-node subsamples (uniform size, capped) before estimation.
pub fn run_subsample_cell(
    graph: &Graph,
    reference: &ReferenceCell,
    opts: &HarnessOptions,
) -> Result<CellReport> {
    let ctx = RspContext::new(graph, reference.beta)?;
    let bracket = cell_bracket(reference.beta, opts.bracket_factor);
    let mut estimates = Vec::with_capacity(opts.reps);
    let mut boundary_hits = 0;
    for rep in 0..opts.reps {
        let mut rng = ChaCha12Rng::seed_from_u64(opts.seed.wrapping_add(rep as u64));
        let mut set = TrajectorySet::default();
        for walk in draw_walks(&ctx, opts, &mut rng)? {
            // Separated pairs guarantee an interior node, so the subsample
            // always exists.
            if let Some(obs) = subsample_nodes(&walk, &mut rng, SUBSAMPLE_CAP) {
                set.push(obs);
            }
        }
        let fit = staged_mle_beta_incomplete(graph, &set, bracket, opts)?;
        if fit.status != MleStatus::Converged {
            boundary_hits += 1;
        }
        estimates.push(fit.beta_hat);
    }
    Ok(CellReport::from_estimates(reference, estimates, boundary_hits))
}

/// Golden-section maximum of `eval ∘ exp` on [a, b] (ln scale). Returns
/// the ln-argmax and the value there.
fn golden_max<F>(mut a: f64, mut b: f64, rel_tol: f64, eval: &mut F) -> Result<(f64, f64)>
where
    F: FnMut(f64) -> Result<f64>,
{
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = eval(x1.exp())?;
    let mut f2 = eval(x2.exp())?;
    for _ in 0..300 {
        if b - a <= rel_tol {
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
    Ok(if f1 >= f2 { (x1, f1) } else { (x2, f2) })
}

/// Staged β search for large subsample sets: scan a coarse log-spaced
/// grid on a prefix of the observations, then refine on the full set by
/// golden section inside the bracketing grid cells, re-widening the
/// refinement interval (up to three times) if the optimum lands on its
/// edge. Matches [`crate::mle_incomplete::mle_beta_incomplete`] up to the
/// stated tolerance while evaluating the full set far fewer times.
pub fn staged_mle_beta_incomplete(
    graph: &Graph,
    set: &TrajectorySet,
    bracket: (f64, f64),
    opts: &HarnessOptions,
) -> Result<MleResult> {
    let (lo, hi) = bracket;
    if !(lo > 0.0 && hi > lo && hi.is_finite()) {
        return Err(Error::InvalidBracket { lo, hi });
    }
    if set.is_empty() {
        return Err(Error::EmptySet);
    }
    let inc = &opts.incomplete;
    let scan_set;
    let scan: &TrajectorySet = if set.len() > opts.scan_subset.max(1) {
        scan_set = TrajectorySet::new(set.observations[..opts.scan_subset.max(1)].to_vec());
        &scan_set
    } else {
        set
    };
    let mut evaluations = 0usize;
    let mut eval_scan = |beta: f64| -> Result<f64> {
        evaluations += 1;
        log_likelihood_incomplete_with(graph, beta, scan, inc)
    };
    let (ln_lo, ln_hi) = (lo.ln(), hi.ln());
    let g = inc.grid_points.max(3);
    let mut grid = Vec::with_capacity(g);
    for i in 0..g {
        let beta = if i == 0 {
            lo
        } else if i == g - 1 {
            hi
        } else {
            (ln_lo + (ln_hi - ln_lo) * i as f64 / (g - 1) as f64).exp()
        };
        grid.push((beta, eval_scan(beta)?));
    }
    // A subsample set impossible on the whole scan grid is impossible for
    // every superset of it as well.
    if grid.iter().all(|&(_, v)| v == f64::NEG_INFINITY) {
        return Err(Error::AllImpossible);
    }
    let best = (0..g).max_by(|&a, &b| grid[a].1.total_cmp(&grid[b].1)).expect("non-empty");
    let mut eval_full = |beta: f64| -> Result<f64> {
        evaluations += 1;
        log_likelihood_incomplete_with(graph, beta, set, inc)
    };
    if best == 0 || best == g - 1 {
        let status = if best == 0 { MleStatus::BoundaryLo } else { MleStatus::BoundaryHi };
        let beta_hat = grid[best].0;
        let log_likelihood = eval_full(beta_hat)?;
        return Ok(MleResult { beta_hat, log_likelihood, status, bracket, evaluations });
    }
    let spacing = (ln_hi - ln_lo) / (g - 1) as f64;
    let mut a = grid[best - 1].0.ln();
    let mut b = grid[best + 1].0.ln();
    let edge_tol = 2.0 * inc.rel_tol;
    for _ in 0..=3 {
        let (ln_best, value) = golden_max(a, b, inc.rel_tol, &mut eval_full)?;
        let pressed_lo = ln_best - a <= edge_tol;
        let pressed_hi = b - ln_best <= edge_tol;
        if pressed_lo && a > ln_lo + edge_tol {
            a = (a - spacing).max(ln_lo);
            continue;
        }
        if pressed_hi && b < ln_hi - edge_tol {
            b = (b + spacing).min(ln_hi);
            continue;
        }
        let status = if pressed_lo && a <= ln_lo + edge_tol {
            MleStatus::BoundaryLo
        } else if pressed_hi && b >= ln_hi - edge_tol {
            MleStatus::BoundaryHi
        } else {
            MleStatus::Converged
        };
        return Ok(MleResult {
            beta_hat: ln_best.exp(),
            log_likelihood: value,
            status,
            bracket,
            evaluations,
        });
    }
    // Three widenings exhausted with the optimum still pressing the
    // interval edge; report the edge it pressed.
    let (ln_best, value) = golden_max(a, b, inc.rel_tol, &mut eval_full)?;
    let status = if ln_best - a <= edge_tol {
        MleStatus::BoundaryLo
    } else if b - ln_best <= edge_tol {
        MleStatus::BoundaryHi
    } else {
        MleStatus::Converged
    };
    Ok(MleResult { beta_hat: ln_best.exp(), log_likelihood: value, status, bracket, evaluations })
}
