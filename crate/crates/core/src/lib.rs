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

//! Randomized-shortest-paths machinery on directed weighted graphs.
//!
//! The model places a Gibbs-Boltzmann distribution over the hitting paths
//! from a source s to a target t: each path is weighted by its probability
//! under a reference random walk times exp(−β · cost). The inverse
//! temperature β interpolates between the pure random walk (β → 0) and
//! deterministic least-cost routing (β → ∞).
//!
//! The crate provides:
//!
//! - graph construction, grid/landscape generators, and edge-list IO
//!   ([`graph`]);
//! - partition functions, expected costs, edge/node flows, biased
//!   transition matrices, and related divergence quantities ([`rsp`]);
//! - trajectory sampling from the path distribution and subsampling into
//!   partial observations ([`sampler`]);
//! - maximum-likelihood estimation of β from complete trajectories
//!   ([`mle_complete`]) and from partial node/edge observations via
//!   weighted block power series ([`mle_incomplete`], [`series`]);
//! - a brute-force path-enumeration oracle used as ground truth in the
//!   test suites ([`oracle`]);
//! - a recovery harness that regenerates the standard grid experiments
//!   ([`validate`]).

pub mod error;
pub mod graph;
pub mod mle_complete;
pub mod mle_incomplete;
pub mod oracle;
pub mod rsp;
pub mod sampler;
pub mod series;
pub mod validate;

pub use error::{Error, Result};
pub use graph::{build_grid, gaussian_landscape, CostField, Graph, GridShape, LandscapeParams};
pub use mle_complete::{
    log_likelihood_complete, mle_beta_complete, MleResult, MleStatus, DEFAULT_BRACKET,
    DEFAULT_MLE_TOL,
};
pub use mle_incomplete::{
    likelihood_curve, log_likelihood_incomplete, mle_beta_incomplete, IncompleteOptions,
};
pub use rsp::RspContext;
pub use sampler::{Observation, ObservationKind, Trajectory, TrajectorySet};

/// Crate version, recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
