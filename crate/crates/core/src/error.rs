use crate::census::CensusError;
use crate::graph::GraphError;
use crate::graph6::Graph6Error;
use crate::heuristics::HeuristicError;
use crate::runlog::{ConfigError, LogError};
use crate::search::SearchError;
use crate::verifier::VerifierError;
use std::path::PathBuf;
use thiserror::Error;

/// Any failure of a run.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Search(#[from] SearchError),
    #[error(transparent)]
    Heuristic(#[from] HeuristicError),
    #[error(transparent)]
    Verifier(#[from] VerifierError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Graph6(#[from] Graph6Error),
    #[error(transparent)]
    Census(#[from] CensusError),
    #[error(transparent)]
    Log(#[from] LogError),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}
