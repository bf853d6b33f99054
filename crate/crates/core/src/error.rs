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

//! Error type shared by the whole crate.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("node {node} out of range for a graph with {n} nodes")]
    NodeOutOfRange { node: usize, n: usize },

    #[error("self-loop on node {node} is not allowed")]
    SelfLoop { node: usize },

    #[error("duplicate edge ({src}, {dst})")]
    DuplicateEdge { src: usize, dst: usize },

    #[error("{what} must be positive on edge ({src}, {dst}), got {value}")]
    NonPositiveWeight {
        src: usize,
        dst: usize,
        what: &'static str,
        value: f64,
    },

    #[error("node {node} has no outgoing edges (pass allow_sinks to permit)")]
    SinkNode { node: usize },

    #[error("edge list line {line}: {reason}")]
    EdgeList { line: u64, reason: String },

    #[error("raster line {line}: {reason}")]
    Raster { line: usize, reason: String },

    #[error("invalid parameter: {what}")]
    BadParameter { what: String },

    #[error("beta must be positive, got {beta}")]
    BetaNotPositive { beta: f64 },

    #[error("source and target coincide at node {node}; hitting paths are undefined")]
    SameEndpoints { node: usize },

    #[error("target {t} is unreachable from source {s}")]
    Unreachable { s: usize, t: usize },

    #[error("linear solve failed: {what}")]
    SingularSystem { what: &'static str },

    #[error(
        "series did not meet tolerance within {terms} terms \
         (partial log-value {partial_log}, log tail bound {tail_log})"
    )]
    SeriesBudget {
        terms: usize,
        partial_log: f64,
        tail_log: f64,
    },

    #[error("random walk exceeded the step budget of {cap} without hitting the target")]
    StepBudget { cap: usize },

    #[error("path enumeration exceeded the budget of {cap} paths")]
    PathBudget { cap: usize },

    #[error("enumeration truncated at length {max_len} cannot meet the requested tail {requested:e}")]
    TailNotMet { max_len: usize, requested: f64 },

    #[error("empty trajectory set")]
    EmptySet,

    #[error("invalid bracket [{lo}, {hi}]")]
    InvalidBracket { lo: f64, hi: f64 },

    #[error(
        "bracket failure: requested value {requested} exceeds {attained} attained at the bracket edge"
    )]
    BracketFailure { requested: f64, attained: f64 },

    #[error("every observation has zero likelihood; the data are inconsistent with the graph")]
    AllImpossible,

    #[error("invalid trajectory: {reason}")]
    BadTrajectory { reason: String },

    #[error("invalid observation: {reason}")]
    BadObservation { reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
