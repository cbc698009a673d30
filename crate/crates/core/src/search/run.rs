use super::{build_start, Search, SearchOptions, StartSource, StartSpec};
use crate::census::full_census;
use crate::error::Error;
use crate::graph::Graph;
use crate::heuristics::{pretrain, Activation, Heuristic, MlpModel, TrainReport};
use crate::runlog::{
    counters_file_name, load_model, save_model, CounterStore, IterationRecord, RunConfig, RunLog, RunMetadata,
    MODEL_FILE, RUN_LOG_FILE,
};
use crate::search::StartMode;
use crate::verifier::{EdgeBoundTable, RamseyParams, Verifier};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::path::PathBuf;
use std::sync::atomic::{AtomicBool, Ordering};
use std::time::{Duration, Instant};

// Independent RNG streams derived from the run seed.
const STREAM_START: u64 = 0;
const STREAM_MODEL_INIT: u64 = 1;
const STREAM_PRETRAIN: u64 = 2;
const STREAM_SCORE: u64 = 3;
const STREAM_TRAIN: u64 = 4;

fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Termination {
    /// The iteration limit was reached.
    Completed,
    /// No neighbor had an unseen census key.
    Exhausted,
    Interrupted,
}

impl Termination {
    pub fn name(self) -> &'static str {
        match self {
            Termination::Completed => "completed",
            Termination::Exhausted => "exhausted",
            Termination::Interrupted => "interrupted",
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub status: Termination,
    pub iterations: u64,
    pub counters: Vec<Graph>,
    pub step_times: Vec<Duration>,
    pub training_invocations: usize,
    pub pretrain_report: Option<TrainReport>,
    pub model: Option<MlpModel>,
    pub output_dir: PathBuf,
}

impl RunResult {
    pub fn mean_step_time(&self) -> Option<Duration> {
        let n = self.step_times.len() as u32;
        (n > 0).then(|| self.step_times.iter().sum::<Duration>() / n)
    }
}

fn start_spec(config: &RunConfig) -> StartSpec {
    let source = || StartSource::File {
        path: config.starting_graph_path.clone().unwrap_or_default(),
        index: config.starting_graph_index,
    };
    match config.starting_graph {
        StartMode::Empty => StartSpec::Empty,
        StartMode::Random => StartSpec::Random,
        StartMode::FromPrior => StartSpec::FromPrior { source: source(), random_edges: config.starting_edges },
        StartMode::FromCurrent => StartSpec::FromCurrent { source: source() },
    }
}

/// Builds the search described by `config`, including model loading and
/// pretraining, without touching the output directory.
pub fn prepare(config: &RunConfig) -> Result<(Search, Option<TrainReport>), Error> {
    let params = RamseyParams::new(config.s, config.t, config.n)?;
    let verifier = match &config.edge_bounds {
        Some(path) => Verifier::with_table(params, EdgeBoundTable::load(path)?),
        None => Verifier::new(params),
    };

    let kind = config.heuristic;
    let mut pretrain_report = None;
    let model = match kind.input_dim() {
        None => None,
        Some(dim) => {
            let mut model = match &config.load_model {
                Some(path) => load_model(path)?,
                None => MlpModel::new(
                    dim,
                    &config.model,
                    Activation::Relu,
                    config.learning_rate,
                    &mut stream(config.seed, STREAM_MODEL_INIT),
                )?,
            };
            model.set_learning_rate(config.learning_rate);
            if config.pretrain {
                let mut data = Vec::new();
                for path in &config.pretrain_data {
                    data.extend(crate::heuristics::load_pretrain_csv(path, kind.uses_scaled_features())?);
                }
                let mut rng = stream(config.seed, STREAM_PRETRAIN);
                pretrain_report =
                    Some(pretrain(&mut model, &data, config.training_epochs, config.batch_size, &mut rng)?);
            }
            Some(model)
        }
    };
    let heuristic = Heuristic::new(kind, model)?;

    let start = build_start(&start_spec(config), params, &mut stream(config.seed, STREAM_START))?;
    let options = SearchOptions { alpha: config.alpha, past_cap: config.past_cap, parallel: config.parallel };
    let search = Search::new(verifier, heuristic, start, options, stream(config.seed, STREAM_SCORE))?;
    Ok((search, pretrain_report))
}

/// Runs the search to completion, exhaustion or interruption, writing
/// `run.jsonl`, the counterexample file, `run_meta.json` and, for trainable
/// heuristics, `model.txt` under the configured output directory.
pub fn run(config: &RunConfig, interrupt: Option<&AtomicBool>) -> Result<RunResult, Error> {
    let started = Instant::now();
    let dir = config.output_dir.clone();
    std::fs::create_dir_all(&dir).map_err(|e| Error::Io { path: dir.clone(), source: e })?;
    let mut meta = RunMetadata::new(config.clone());

    let (mut search, pretrain_report) = match prepare(config) {
        Ok(p) => p,
        Err(e) => {
            meta.status = "failed".into();
            meta.error = Some(e.to_string());
            let _ = meta.write_to_dir(&dir);
            return Err(e);
        }
    };
    meta.pretrain_loss = pretrain_report.as_ref().map(|r| (r.initial_loss, r.final_loss));

    let mut log = RunLog::create(&dir.join(RUN_LOG_FILE), &meta)?;
    let mut store = CounterStore::open(&dir.join(counters_file_name(config.s, config.t, config.n)))?;
    let mut train_rng = stream(config.seed, STREAM_TRAIN);
    let mut step_times = Vec::new();
    let mut training_invocations = 0;
    let limit = config.max_iterations();
    let batch = config.iter_batch as u64;

    let outcome: Result<Termination, Error> = (|| loop {
        if interrupt.is_some_and(|flag| flag.load(Ordering::SeqCst)) {
            return Ok(Termination::Interrupted);
        }
        if limit.is_some_and(|l| search.iteration() >= l) {
            return Ok(Termination::Completed);
        }
        let t0 = Instant::now();
        let report = search.step()?;
        for g in &report.new_counters {
            store.append(g)?;
        }
        if report.exhausted() {
            return Ok(Termination::Exhausted);
        }
        let mut train_loss = None;
        if search.iteration() % batch == 0 {
            if let Some(r) = search.train_pending(config.epochs, config.batch_size, &mut train_rng)? {
                training_invocations += 1;
                train_loss = Some(r.final_loss);
            }
        }
        let elapsed = t0.elapsed();
        step_times.push(elapsed);
        debug_assert_eq!(search.census(), &full_census(search.graph()));
        log.record(&IterationRecord {
            iteration: report.iteration,
            census: *search.census().counts(),
            edges: search.graph().edge_count(),
            chosen_edge: report.chosen,
            score: report.score,
            candidates: report.candidate_scores.len(),
            new_counters: report.new_counters.len(),
            total_counters: search.counters().len(),
            elapsed_ms: elapsed.as_secs_f64() * 1e3,
            enumerations: config.profiler.then_some(report.enumerations),
            train_loss,
        })?;
        if search.iteration() % batch == 0 {
            log.flush()?;
        }
    })();

    let log_flushed = log.flush();
    let model = search.heuristic().model().cloned();
    let model_saved = match &model {
        Some(m) => save_model(m, &dir.join(MODEL_FILE)),
        None => Ok(()),
    };
    meta.iterations = search.iteration();
    meta.counters = search.counters().len();
    meta.training_invocations = training_invocations;
    meta.wall_seconds = started.elapsed().as_secs_f64();
    meta.mean_step_ms = (!step_times.is_empty())
        .then(|| step_times.iter().map(Duration::as_secs_f64).sum::<f64>() * 1e3 / step_times.len() as f64);
    match &outcome {
        Ok(status) => meta.status = status.name().into(),
        Err(e) => {
            meta.status = "failed".into();
            meta.error = Some(e.to_string());
        }
    }
    meta.write_to_dir(&dir)?;
    let status = outcome?;
    log_flushed?;
    model_saved?;

    Ok(RunResult {
        status,
        iterations: search.iteration(),
        counters: search.counters().to_vec(),
        step_times,
        training_invocations,
        pretrain_report,
        model,
        output_dir: dir,
    })
}
