//! Run configuration and on-disk outputs: the JSONL iteration log, the
//! append-only counterexample store, and model files.

mod config;

pub use config::{load_config, normalize_key, ConfigBuilder, ConfigError, RunConfig, KEYS};

use crate::census::ClassCounts;
use crate::graph::{Edge, Graph};
use crate::graph6;
use crate::heuristics::{HeuristicError, MlpModel};
use serde::{Deserialize, Serialize};
use std::fs::{File, OpenOptions};
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

pub const RUN_LOG_FILE: &str = "run.jsonl";
pub const RUN_META_FILE: &str = "run_meta.json";
pub const MODEL_FILE: &str = "model.txt";

/// `counters_<s>_<t>_<n>.g6`
pub fn counters_file_name(s: usize, t: usize, n: usize) -> String {
    format!("counters_{s}_{t}_{n}.g6")
}

fn io_at(path: &Path) -> impl FnOnce(io::Error) -> LogError + '_ {
    move |source| LogError::Io { path: path.to_path_buf(), source }
}

#[derive(Debug, thiserror::Error)]
pub enum LogError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("{path}: {source}")]
    Json { path: PathBuf, source: serde_json::Error },
    #[error("model file {path}: {source}")]
    Model { path: PathBuf, source: HeuristicError },
}

/// One search iteration as written to the log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iteration: u64,
    /// Census of the graph after the move.
    pub census: ClassCounts,
    pub edges: usize,
    pub chosen_edge: Option<Edge>,
    pub score: Option<f64>,
    pub candidates: usize,
    pub new_counters: usize,
    pub total_counters: usize,
    pub elapsed_ms: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub enumerations: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub train_loss: Option<f64>,
}

/// Run header and, once finished, the run summary.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunMetadata {
    pub version: &'static str,
    /// Milliseconds since the Unix epoch at run start.
    pub started_unix_ms: u128,
    pub config: RunConfig,
    pub status: String,
    pub iterations: u64,
    pub counters: usize,
    pub training_invocations: usize,
    pub mean_step_ms: Option<f64>,
    pub wall_seconds: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pretrain_loss: Option<(f64, f64)>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl RunMetadata {
    pub fn new(config: RunConfig) -> Self {
        RunMetadata {
            version: env!("CARGO_PKG_VERSION"),
            started_unix_ms: std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .map_or(0, |d| d.as_millis()),
            config,
            status: "running".into(),
            iterations: 0,
            counters: 0,
            training_invocations: 0,
            mean_step_ms: None,
            wall_seconds: 0.0,
            pretrain_loss: None,
            error: None,
        }
    }

    /// Writes `<dir>/run_meta.json` through a temporary file.
    pub fn write_to_dir(&self, dir: &Path) -> Result<PathBuf, LogError> {
        let path = dir.join(RUN_META_FILE);
        let text = serde_json::to_string_pretty(self).map_err(|e| LogError::Json { path: path.clone(), source: e })?;
        write_atomically(&path, text.as_bytes())?;
        Ok(path)
    }
}

#[derive(Serialize)]
struct Tagged<'a, T: Serialize> {
    #[serde(rename = "type")]
    kind: &'a str,
    #[serde(flatten)]
    body: &'a T,
}

/// JSON-lines log: a `metadata` line, then one `iteration` line per step.
#[derive(Debug)]
pub struct RunLog {
    path: PathBuf,
    out: BufWriter<File>,
}

impl RunLog {
    pub fn create(path: &Path, metadata: &RunMetadata) -> Result<Self, LogError> {
        let file = File::create(path).map_err(io_at(path))?;
        let mut log = RunLog { path: path.to_path_buf(), out: BufWriter::new(file) };
        log.write_line("metadata", metadata)?;
        log.flush()?;
        Ok(log)
    }

    fn write_line<T: Serialize>(&mut self, kind: &str, body: &T) -> Result<(), LogError> {
        serde_json::to_writer(&mut self.out, &Tagged { kind, body })
            .map_err(|e| LogError::Json { path: self.path.clone(), source: e })?;
        self.out.write_all(b"\n").map_err(io_at(&self.path))
    }

    pub fn record(&mut self, record: &IterationRecord) -> Result<(), LogError> {
        self.write_line("iteration", record)
    }

    pub fn flush(&mut self) -> Result<(), LogError> {
        self.out.flush().map_err(io_at(&self.path))
    }

    pub fn path(&self) -> &Path {
        &self.path
    }
}

/// Reads the iteration records of a run log, skipping other line types.
pub fn read_iterations(path: &Path) -> Result<Vec<IterationRecord>, LogError> {
    let text = std::fs::read_to_string(path).map_err(io_at(path))?;
    let json = |e| LogError::Json { path: path.to_path_buf(), source: e };
    let mut out = Vec::new();
    for line in text.lines().filter(|l| !l.trim().is_empty()) {
        let value: serde_json::Value = serde_json::from_str(line).map_err(json)?;
        if value.get("type").and_then(|t| t.as_str()) == Some("iteration") {
            out.push(serde_json::from_value(value).map_err(json)?);
        }
    }
    Ok(out)
}

/// Append-only graph6 file. Each graph is one `write_all` on an `O_APPEND`
/// handle, so concurrent writers never interleave within a line.
#[derive(Debug)]
pub struct CounterStore {
    path: PathBuf,
    file: File,
}

impl CounterStore {
    pub fn open(path: &Path) -> Result<Self, LogError> {
        let file = OpenOptions::new().create(true).append(true).open(path).map_err(io_at(path))?;
        Ok(CounterStore { path: path.to_path_buf(), file })
    }

    pub fn append(&mut self, g: &Graph) -> Result<(), LogError> {
        let line = format!("{}\n", graph6::encode(g));
        self.file.write_all(line.as_bytes()).map_err(io_at(&self.path))
    }

    pub fn path(&self) -> &Path {
        &self.path
    }
}

fn write_atomically(path: &Path, bytes: &[u8]) -> Result<(), LogError> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    let mut f = File::create(&tmp).map_err(io_at(&tmp))?;
    f.write_all(bytes).and_then(|_| f.sync_all()).map_err(io_at(&tmp))?;
    std::fs::rename(&tmp, path).map_err(io_at(path))
}

/// Writes `model` to `path` through a temporary file and rename.
pub fn save_model(model: &MlpModel, path: &Path) -> Result<(), LogError> {
    write_atomically(path, model.to_text().as_bytes())
}

pub fn load_model(path: &Path) -> Result<MlpModel, LogError> {
    let file = File::open(path).map_err(io_at(path))?;
    MlpModel::read_from(BufReader::new(file)).map_err(|e| LogError::Model { path: path.to_path_buf(), source: e })
}
