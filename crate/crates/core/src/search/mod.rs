//! Best-first search over single-edge flips.
//!
//! Each step evaluates every editable neighbor of the current graph, saves
//! the counterexamples among them, scores the neighbors whose census key has
//! never been expanded, and moves to the best one (lowest edge index on ties).
//! Only expanded keys block later moves; a key scored but not chosen stays
//! reachable. Training examples are collected once per key, on first sight.

mod run;
mod start;

pub use run::{prepare, run, RunResult, Termination};
pub use start::{build_start, Start, StartMode, StartSource, StartSpec};

use crate::census::{full_census, update_census, Census, CensusError, CensusKey};
use crate::graph::{Edge, Graph, GraphError};
use crate::graph6::Graph6Error;
use crate::heuristics::{Heuristic, HeuristicError, RewardState, TrainReport, TrainingExample};
use crate::verifier::{is_counterexample_by_search, RamseyParams, Verifier, VerifierError};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::collections::{HashSet, VecDeque};
use std::path::PathBuf;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SearchError {
    #[error("cannot read starting graph file {path}: {source}")]
    StartFileUnreadable { path: PathBuf, source: std::io::Error },
    #[error("starting graph file {path}: {source}")]
    BadStartFile { path: PathBuf, source: Graph6Error },
    #[error("starting graph index {index} out of range: {path} holds {count} graphs")]
    StartIndexOutOfRange { path: PathBuf, index: usize, count: usize },
    #[error("starting graph {origin} has {found} vertices, expected {expected}")]
    StartOrderMismatch { origin: String, expected: usize, found: usize },
    #[error("starting graph {origin} is not an R({s},{t},{n}) counterexample")]
    StartNotCounterexample { origin: String, s: usize, t: usize, n: usize },
    #[error("fast verifier accepted a graph that exhaustive search rejects: {0}")]
    VerifierDisagreement(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Verifier(#[from] VerifierError),
    #[error(transparent)]
    Heuristic(#[from] HeuristicError),
    #[error(transparent)]
    Census(#[from] CensusError),
}

/// A set of census keys, optionally bounded with FIFO eviction.
#[derive(Debug, Clone, Default)]
pub struct PastSet {
    keys: HashSet<CensusKey>,
    order: VecDeque<CensusKey>,
    cap: Option<usize>,
}

impl PastSet {
    pub fn new(cap: Option<usize>) -> Self {
        PastSet { cap, ..Default::default() }
    }

    pub fn contains(&self, key: &CensusKey) -> bool {
        self.keys.contains(key)
    }

    /// Returns whether `key` was new.
    pub fn insert(&mut self, key: CensusKey) -> bool {
        if !self.keys.insert(key) {
            return false;
        }
        if let Some(cap) = self.cap {
            self.order.push_back(key);
            while self.order.len() > cap {
                let old = self.order.pop_front().unwrap();
                self.keys.remove(&old);
            }
        }
        true
    }

    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchOptions {
    pub alpha: f64,
    pub past_cap: Option<usize>,
    /// Evaluate neighbors on the rayon pool. Results do not depend on this.
    pub parallel: bool,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions { alpha: 0.0, past_cap: None, parallel: true }
    }
}

/// Outcome of one [`Search::step`].
#[derive(Debug, Clone, PartialEq)]
pub struct StepReport {
    /// Completed iterations after this step.
    pub iteration: u64,
    /// Flipped pair, `None` when the step was exhausted.
    pub chosen: Option<Edge>,
    pub score: Option<f64>,
    /// First neighbor of each unexpanded key, with its score, in edge order.
    pub candidate_scores: Vec<(Edge, f64)>,
    pub neighbors: usize,
    /// Counterexamples with a census key not saved before.
    pub new_counters: Vec<Graph>,
    /// Neighbors verified by exhaustive search rather than census or bound.
    pub enumerations: usize,
}

impl StepReport {
    pub fn exhausted(&self) -> bool {
        self.chosen.is_none()
    }
}

/// Search state plus everything needed to advance it.
#[derive(Debug, Clone)]
pub struct Search {
    params: RamseyParams,
    verifier: Verifier,
    heuristic: Heuristic,
    graph: Graph,
    census: Census,
    editable: Vec<Edge>,
    /// Keys of graphs the search has moved to.
    past: PastSet,
    /// Keys ever scored or expanded; gates training examples.
    seen: PastSet,
    pending: Vec<TrainingExample>,
    reward: RewardState,
    counters: Vec<Graph>,
    counter_keys: HashSet<CensusKey>,
    iteration: u64,
    rng: ChaCha8Rng,
    parallel: bool,
}

impl Search {
    /// The start graph's key is marked expanded. A start that is itself a
    /// counterexample is not saved, but its key is, so it is never reported
    /// as found, and the reward clock starts from it.
    pub fn new(
        verifier: Verifier,
        heuristic: Heuristic,
        start: Start,
        options: SearchOptions,
        rng: ChaCha8Rng,
    ) -> Result<Self, SearchError> {
        let params = verifier.params();
        if start.graph.order() != params.n {
            return Err(SearchError::StartOrderMismatch {
                origin: "start".into(),
                expected: params.n,
                found: start.graph.order(),
            });
        }
        let census = full_census(&start.graph);
        let mut past = PastSet::new(options.past_cap);
        past.insert(census.key());
        let mut seen = PastSet::new(options.past_cap);
        seen.insert(census.key());
        let mut reward = RewardState::new(options.alpha);
        let mut counter_keys = HashSet::new();
        if verifier.is_counterexample(&start.graph, &census) {
            reward.record_counter();
            counter_keys.insert(census.key());
        }
        Ok(Search {
            params,
            verifier,
            heuristic,
            graph: start.graph,
            census,
            editable: start.editable,
            past,
            seen,
            pending: Vec::new(),
            reward,
            counters: Vec::new(),
            counter_keys,
            iteration: 0,
            rng,
            parallel: options.parallel,
        })
    }

    pub fn params(&self) -> RamseyParams {
        self.params
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn census(&self) -> &Census {
        &self.census
    }

    pub fn editable(&self) -> &[Edge] {
        &self.editable
    }

    pub fn past(&self) -> &PastSet {
        &self.past
    }

    pub fn pending(&self) -> &[TrainingExample] {
        &self.pending
    }

    pub fn reward(&self) -> &RewardState {
        &self.reward
    }

    pub fn counters(&self) -> &[Graph] {
        &self.counters
    }

    pub fn iteration(&self) -> u64 {
        self.iteration
    }

    pub fn heuristic(&self) -> &Heuristic {
        &self.heuristic
    }

    pub fn heuristic_mut(&mut self) -> &mut Heuristic {
        &mut self.heuristic
    }

    /// One best-first step. An exhausted step leaves the graph unchanged and
    /// does not count as an iteration.
    pub fn step(&mut self) -> Result<StepReport, SearchError> {
        let evaluate = |&e: &Edge| {
            let (g, c) = update_census(&self.graph, &self.census, e);
            let verdict = self.verifier.check(&g, &c);
            (e, g, c, verdict)
        };
        let mut evals: Vec<_> = if self.parallel && self.editable.len() >= 32 {
            self.editable.par_iter().map(evaluate).collect()
        } else {
            self.editable.iter().map(evaluate).collect()
        };

        let trainable = self.heuristic.is_trainable();
        let mut report = StepReport {
            iteration: self.iteration,
            chosen: None,
            score: None,
            candidate_scores: Vec::new(),
            neighbors: evals.len(),
            new_counters: Vec::new(),
            enumerations: 0,
        };
        let mut best: Option<(usize, f64)> = None;
        let mut step_keys = HashSet::new();
        let mut found_counter = false;
        for (i, (e, g, c, verdict)) in evals.iter().enumerate() {
            report.enumerations += verdict.enumerated() as usize;
            let is_counter = verdict.is_counterexample();
            let key = c.key();
            if is_counter {
                if self.counter_keys.insert(key) {
                    if !is_counterexample_by_search(g, self.params.s, self.params.t) {
                        return Err(SearchError::VerifierDisagreement(crate::graph6::encode(g)));
                    }
                    self.counters.push(g.clone());
                    report.new_counters.push(g.clone());
                }
                self.reward.record_counter();
                found_counter = true;
            }
            if self.past.contains(&key) || !step_keys.insert(key) {
                continue;
            }
            if self.seen.insert(key) && trainable {
                let features = self.heuristic.features(c, &self.params)?;
                self.pending.push(TrainingExample::new(features, self.reward.label(is_counter)));
            }
            let score = self.heuristic.score(c, &self.params, &mut self.rng)?;
            report.candidate_scores.push((*e, score));
            if best.is_none_or(|(_, s)| score > s) {
                best = Some((i, score));
            }
        }

        if let Some((i, score)) = best {
            let (e, g, c, _) = evals.swap_remove(i);
            self.past.insert(c.key());
            self.graph = g;
            self.census = c;
            self.iteration += 1;
            if !found_counter {
                self.reward.tick();
            }
            report.iteration = self.iteration;
            report.chosen = Some(e);
            report.score = Some(score);
        }
        Ok(report)
    }

    /// Trains the model on the pending examples and clears them. Returns
    /// `None` when there was nothing to train, or no model.
    pub fn train_pending<R: Rng + ?Sized>(
        &mut self,
        epochs: usize,
        batch_size: usize,
        rng: &mut R,
    ) -> Result<Option<TrainReport>, SearchError> {
        let pending = std::mem::take(&mut self.pending);
        match self.heuristic.model_mut() {
            Some(model) if !pending.is_empty() => Ok(Some(model.train(&pending, epochs, batch_size, rng)?)),
            _ => Ok(None),
        }
    }
}
