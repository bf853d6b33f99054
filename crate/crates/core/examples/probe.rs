// Temporary timing probe; not part of the library surface.
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rsp_core::sampler::{sample_path, sample_separated_pair, subsample_nodes, SUBSAMPLE_CAP};
use rsp_core::validate::{
    staged_mle_beta_incomplete, uniform_grid_20, HarnessOptions, REFERENCE_SUBSAMPLE_UNIFORM,
};
use rsp_core::{RspContext, TrajectorySet};

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let beta: f64 = args.get(1).map(|s| s.parse().unwrap()).unwrap_or(0.01);
    let graph = uniform_grid_20().unwrap();
    let opts = HarnessOptions { reps: 1, seed: 42, ..HarnessOptions::default() };
    let ctx = RspContext::new(&graph, beta).unwrap();

    let t0 = Instant::now();
    let mut rng = ChaCha12Rng::seed_from_u64(opts.seed);
    let mut set = TrajectorySet::default();
    let mut lens = Vec::new();
    let mut ms = Vec::new();
    for _ in 0..opts.paths_per_rep {
        let (s, t) = sample_separated_pair(&graph, opts.min_hops, &mut rng).unwrap();
        let walk = sample_path(&ctx, s, t, &mut rng).unwrap();
        lens.push(walk.len());
        if let Some(obs) = subsample_nodes(&walk, &mut rng, SUBSAMPLE_CAP) {
            ms.push(obs.observed_len());
            set.push(obs);
        }
    }
    let sample_time = t0.elapsed();
    lens.sort_unstable();
    ms.sort_unstable();
    println!(
        "beta={beta}: sampled {} walks in {:.2?}; len median {} max {}; M median {} max {}",
        set.len(),
        sample_time,
        lens[lens.len() / 2],
        lens.last().unwrap(),
        ms[ms.len() / 2],
        ms.last().unwrap()
    );

    let t1 = Instant::now();
    let bracket = (beta / opts.bracket_factor, beta * opts.bracket_factor);
    let fit = staged_mle_beta_incomplete(&graph, &set, bracket, &opts).unwrap();
    println!(
        "fit in {:.2?}: beta_hat={:.6} status={:?} evaluations={} (ref {:?})",
        t1.elapsed(),
        fit.beta_hat,
        fit.status,
        fit.evaluations,
        REFERENCE_SUBSAMPLE_UNIFORM[0]
    );
}
