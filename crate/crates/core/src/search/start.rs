use super::SearchError;
use crate::census::full_census;
use crate::graph::{all_pairs, Edge, Graph};
use crate::graph6;
use crate::verifier::{RamseyParams, Verifier};
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum StartMode {
    #[serde(rename = "EMPTY")]
    Empty,
    #[serde(rename = "RANDOM")]
    Random,
    #[serde(rename = "FROM_PRIOR")]
    FromPrior,
    #[serde(rename = "FROM_CURRENT")]
    FromCurrent,
}

impl StartMode {
    pub fn name(self) -> &'static str {
        match self {
            StartMode::Empty => "EMPTY",
            StartMode::Random => "RANDOM",
            StartMode::FromPrior => "FROM_PRIOR",
            StartMode::FromCurrent => "FROM_CURRENT",
        }
    }
}

impl fmt::Display for StartMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for StartMode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_uppercase().as_str() {
            "EMPTY" => Ok(StartMode::Empty),
            "RANDOM" => Ok(StartMode::Random),
            "FROM_PRIOR" => Ok(StartMode::FromPrior),
            "FROM_CURRENT" => Ok(StartMode::FromCurrent),
            _ => Err(format!("unknown starting graph `{s}` (expected EMPTY, RANDOM, FROM_PRIOR or FROM_CURRENT)")),
        }
    }
}

/// Where the search starts.
#[derive(Debug, Clone, PartialEq)]
pub enum StartSpec {
    Empty,
    Random,
    /// Extends a counterexample on `n - 1` vertices by one vertex.
    FromPrior { source: StartSource, random_edges: bool },
    /// Starts from a counterexample on `n` vertices.
    FromCurrent { source: StartSource },
}

/// A starting graph, either read from a graph6 file or given directly.
#[derive(Debug, Clone, PartialEq)]
pub enum StartSource {
    File { path: PathBuf, index: usize },
    Graph(Graph),
}

impl StartSpec {
    pub fn mode(&self) -> StartMode {
        match self {
            StartSpec::Empty => StartMode::Empty,
            StartSpec::Random => StartMode::Random,
            StartSpec::FromPrior { .. } => StartMode::FromPrior,
            StartSpec::FromCurrent { .. } => StartMode::FromCurrent,
        }
    }
}

/// Starting graph and the pairs the search may flip.
#[derive(Debug, Clone)]
pub struct Start {
    pub graph: Graph,
    pub editable: Vec<Edge>,
}

fn load_indexed(path: &Path, index: usize) -> Result<Graph, SearchError> {
    let file = File::open(path).map_err(|e| SearchError::StartFileUnreadable { path: path.to_path_buf(), source: e })?;
    let mut graphs = graph6::read_all(BufReader::new(file))
        .map_err(|e| SearchError::BadStartFile { path: path.to_path_buf(), source: e })?;
    let count = graphs.len();
    if index >= count {
        return Err(SearchError::StartIndexOutOfRange { path: path.to_path_buf(), index, count });
    }
    Ok(graphs.swap_remove(index))
}

/// Loads the source graph and checks it is an `R(s, t, order)` counterexample.
fn load_counterexample(source: &StartSource, params: RamseyParams, order: usize) -> Result<Graph, SearchError> {
    let (graph, origin) = match source {
        StartSource::File { path, index } => (load_indexed(path, *index)?, format!("{}[{index}]", path.display())),
        StartSource::Graph(g) => (g.clone(), "given graph".to_string()),
    };
    if graph.order() != order {
        return Err(SearchError::StartOrderMismatch { origin, expected: order, found: graph.order() });
    }
    let verifier = Verifier::new(params.with_order(order)?);
    if !verifier.is_counterexample(&graph, &full_census(&graph)) {
        return Err(SearchError::StartNotCounterexample { origin, s: params.s, t: params.t, n: order });
    }
    Ok(graph)
}

/// Builds the starting graph. `rng` is only drawn from by RANDOM and by
/// FROM_PRIOR with random edges.
pub fn build_start<R: Rng + ?Sized>(spec: &StartSpec, params: RamseyParams, rng: &mut R) -> Result<Start, SearchError> {
    let n = params.n;
    match spec {
        StartSpec::Empty => Ok(Start { graph: Graph::new(n)?, editable: all_pairs(n) }),
        StartSpec::Random => Ok(Start { graph: Graph::random(n, 0.5, rng)?, editable: all_pairs(n) }),
        StartSpec::FromCurrent { source } => {
            Ok(Start { graph: load_counterexample(source, params, n)?, editable: all_pairs(n) })
        }
        StartSpec::FromPrior { source, random_edges } => {
            if n < 2 {
                return Err(SearchError::StartOrderMismatch { origin: "FROM_PRIOR".into(), expected: 2, found: n });
            }
            let mut graph = load_counterexample(source, params, n - 1)?.with_extra_vertex()?;
            let new = n - 1;
            let editable: Vec<Edge> = (0..new).map(|u| Edge::new(u, new)).collect::<Result<_, _>>()?;
            if *random_edges {
                for &e in &editable {
                    if rng.random_bool(0.5) {
                        graph.toggle(e);
                    }
                }
            }
            Ok(Start { graph, editable })
        }
    }
}
