//! Best-first search for Ramsey counterexamples.
//!
//! Graphs are scored through their census of 4-vertex induced subgraphs,
//! which is maintained incrementally as single edges are flipped. The search
//! greedily moves to the best-scoring neighbor whose census has not been seen
//! before and records every `R(s, t, n)` counterexample it passes.

pub mod census;
mod error;
pub mod graph;
pub mod graph6;
pub mod heuristics;
pub mod runlog;
pub mod search;
pub mod verifier;

pub use census::{full_census, update_census, Census, CensusKey, ClassCounts, ClassId, FeatureVector};
pub use error::Error;
pub use graph::{Edge, Graph, GraphError};
pub use heuristics::{Heuristic, HeuristicKind, MlpModel, RewardState, TrainingExample};
pub use runlog::{load_config, RunConfig};
pub use search::{run, RunResult, Search, StartMode, Termination};
pub use verifier::{min_edges_bound, RamseyParams, Verdict, Verifier};
