//! Flat `key = value` run configuration.
//!
//! Keys are case-insensitive and `-` is read as `_`, so `Iter_batch`,
//! `iter-batch` and `iter_batch` name the same setting. `#` starts a comment.

use crate::graph::MAX_VERTICES;
use crate::heuristics::HeuristicKind;
use crate::search::StartMode;
use serde::Serialize;
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("reading config {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("config line {line}: expected `key = value`")]
    Syntax { line: usize },
    #[error("unknown config key `{0}`")]
    UnknownKey(String),
    #[error("config key `{0}` given twice")]
    DuplicateKey(String),
    #[error("missing required config key `{0}`")]
    MissingKey(&'static str),
    #[error("invalid value `{value}` for `{key}`: {reason}")]
    InvalidValue { key: String, value: String, reason: String },
}

/// Every accepted key with its default (`None` when required) and meaning.
pub const KEYS: &[(&str, Option<&str>, &str)] = &[
    ("n", None, "graph order"),
    ("s", None, "forbidden clique order"),
    ("t", None, "forbidden independent set order"),
    ("heuristic", None, "RANDOM, 4PATH, DNN or SCALED_DNN"),
    ("starting_graph", None, "EMPTY, RANDOM, FROM_PRIOR or FROM_CURRENT"),
    ("starting_graph_path", Some(""), "graph6 file holding the starting counterexample"),
    ("starting_graph_index", Some("0"), "0-based line index into the starting graph file"),
    ("starting_edges", Some("0"), "FROM_PRIOR: randomly connect the new vertex (0/1)"),
    ("iter_batch", Some("20"), "iterations between model updates"),
    ("iter_batches", Some("50"), "number of iteration batches, or `none` for no limit"),
    ("load_model", Some(""), "model file to start from instead of a fresh model"),
    ("profiler", Some("0"), "log per-step verification statistics (0/1)"),
    ("pretrain", Some("0"), "pretrain on pretrain_data before searching (0/1)"),
    ("pretrain_data", Some(""), "comma-separated pretraining CSV files"),
    ("training_epochs", Some("1"), "epochs of pretraining"),
    ("epochs", Some("1"), "epochs per batch update"),
    ("batch_size", Some("32"), "SGD mini-batch size"),
    ("loss_info", Some("binary_crossentropy"), "training loss (only binary_crossentropy)"),
    ("alpha", Some("0"), "reward decay for non-counterexamples, in [0, 1]"),
    ("model", Some("36,12"), "hidden layer widths of the default model"),
    ("learning_rate", Some("0.001"), "SGD step size"),
    ("seed", Some("0"), "random seed"),
    ("output_dir", Some("runs"), "directory for run.jsonl, counters and model"),
    ("past_cap", Some("none"), "maximum remembered census keys, or `none`"),
    ("edge_bounds", Some(""), "optional `k n e_min` table of R(3,k,n) edge minima"),
    ("parallel", Some("1"), "evaluate neighbors on multiple threads (0/1)"),
];

/// Canonical spelling of a key.
pub fn normalize_key(key: &str) -> String {
    key.trim().to_ascii_lowercase().replace('-', "_")
}

fn known(key: &str) -> bool {
    KEYS.iter().any(|(k, _, _)| *k == key)
}

/// Fully resolved run settings.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub n: usize,
    pub s: usize,
    pub t: usize,
    pub heuristic: HeuristicKind,
    pub starting_graph: StartMode,
    pub starting_graph_path: Option<PathBuf>,
    pub starting_graph_index: usize,
    pub starting_edges: bool,
    pub iter_batch: usize,
    pub iter_batches: Option<usize>,
    pub load_model: Option<PathBuf>,
    pub profiler: bool,
    pub pretrain: bool,
    pub pretrain_data: Vec<PathBuf>,
    pub training_epochs: usize,
    pub epochs: usize,
    pub batch_size: usize,
    pub loss_info: String,
    pub alpha: f64,
    pub model: Vec<usize>,
    pub learning_rate: f64,
    pub seed: u64,
    pub output_dir: PathBuf,
    pub past_cap: Option<usize>,
    pub edge_bounds: Option<PathBuf>,
    pub parallel: bool,
}

impl RunConfig {
    /// Iteration limit, if any.
    pub fn max_iterations(&self) -> Option<u64> {
        self.iter_batches.map(|b| b as u64 * self.iter_batch as u64)
    }

    /// The config as `key = value` lines that [`ConfigBuilder`] reads back.
    pub fn to_text(&self) -> String {
        let path = |p: &Option<PathBuf>| p.as_ref().map(|p| p.display().to_string()).unwrap_or_default();
        let opt = |v: Option<usize>| v.map_or("none".to_string(), |v| v.to_string());
        let flag = |b: bool| if b { "1" } else { "0" };
        let lines = [
            ("n", self.n.to_string()),
            ("s", self.s.to_string()),
            ("t", self.t.to_string()),
            ("heuristic", self.heuristic.to_string()),
            ("starting_graph", self.starting_graph.to_string()),
            ("starting_graph_path", path(&self.starting_graph_path)),
            ("starting_graph_index", self.starting_graph_index.to_string()),
            ("starting_edges", flag(self.starting_edges).into()),
            ("iter_batch", self.iter_batch.to_string()),
            ("iter_batches", opt(self.iter_batches)),
            ("load_model", path(&self.load_model)),
            ("profiler", flag(self.profiler).into()),
            ("pretrain", flag(self.pretrain).into()),
            (
                "pretrain_data",
                self.pretrain_data.iter().map(|p| p.display().to_string()).collect::<Vec<_>>().join(","),
            ),
            ("training_epochs", self.training_epochs.to_string()),
            ("epochs", self.epochs.to_string()),
            ("batch_size", self.batch_size.to_string()),
            ("loss_info", self.loss_info.clone()),
            ("alpha", format!("{:?}", self.alpha)),
            ("model", self.model.iter().map(|w| w.to_string()).collect::<Vec<_>>().join(",")),
            ("learning_rate", format!("{:?}", self.learning_rate)),
            ("seed", self.seed.to_string()),
            ("output_dir", self.output_dir.display().to_string()),
            ("past_cap", opt(self.past_cap)),
            ("edge_bounds", path(&self.edge_bounds)),
            ("parallel", flag(self.parallel).into()),
        ];
        lines.iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }
}

/// Collects raw values from files and overrides, then validates them.
#[derive(Debug, Clone, Default)]
pub struct ConfigBuilder {
    values: BTreeMap<String, String>,
}

impl ConfigBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    /// Parses config text. Each key may appear once per text.
    pub fn parse_text(mut self, text: &str) -> Result<Self, ConfigError> {
        let mut seen = std::collections::HashSet::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or(ConfigError::Syntax { line: i + 1 })?;
            let key = normalize_key(key);
            if key.is_empty() {
                return Err(ConfigError::Syntax { line: i + 1 });
            }
            if !seen.insert(key.clone()) {
                return Err(ConfigError::DuplicateKey(key));
            }
            self = self.set(&key, value.trim())?;
        }
        Ok(self)
    }

    pub fn parse_file(self, path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError::Io { path: path.display().to_string(), source: e })?;
        self.parse_text(&text)
    }

    /// Sets (or overrides) one key.
    pub fn set(mut self, key: &str, value: &str) -> Result<Self, ConfigError> {
        let key = normalize_key(key);
        if !known(&key) {
            return Err(ConfigError::UnknownKey(key));
        }
        self.values.insert(key, value.trim().to_string());
        Ok(self)
    }

    pub fn build(&self) -> Result<RunConfig, ConfigError> {
        let raw = |key: &'static str| -> Result<&str, ConfigError> {
            if let Some(v) = self.values.get(key) {
                return Ok(v.as_str());
            }
            match KEYS.iter().find(|(k, _, _)| *k == key).and_then(|(_, d, _)| *d) {
                Some(d) => Ok(d),
                None => Err(ConfigError::MissingKey(key)),
            }
        };
        let invalid = |key: &str, value: &str, reason: &str| ConfigError::InvalidValue {
            key: key.to_string(),
            value: value.to_string(),
            reason: reason.to_string(),
        };
        let int = |key: &'static str, min: u64| -> Result<u64, ConfigError> {
            let v = raw(key)?;
            let parsed: u64 = v.parse().map_err(|_| invalid(key, v, "expected a non-negative integer"))?;
            if parsed < min {
                return Err(invalid(key, v, &format!("must be at least {min}")));
            }
            Ok(parsed)
        };
        let opt_int = |key: &'static str| -> Result<Option<usize>, ConfigError> {
            let v = raw(key)?;
            if v.is_empty() || v.eq_ignore_ascii_case("none") {
                return Ok(None);
            }
            let parsed: usize = v.parse().map_err(|_| invalid(key, v, "expected a positive integer or `none`"))?;
            if parsed == 0 {
                return Err(invalid(key, v, "must be at least 1"));
            }
            Ok(Some(parsed))
        };
        let flag = |key: &'static str| -> Result<bool, ConfigError> {
            let v = raw(key)?;
            match v.to_ascii_lowercase().as_str() {
                "1" | "true" | "yes" => Ok(true),
                "0" | "false" | "no" => Ok(false),
                _ => Err(invalid(key, v, "expected 0 or 1")),
            }
        };
        let path = |key: &'static str| -> Result<Option<PathBuf>, ConfigError> {
            let v = raw(key)?;
            Ok((!v.is_empty()).then(|| PathBuf::from(v)))
        };
        let real = |key: &'static str| -> Result<f64, ConfigError> {
            let v = raw(key)?;
            v.parse::<f64>().ok().filter(|x| x.is_finite()).ok_or_else(|| invalid(key, v, "expected a number"))
        };

        let n = int("n", 1)? as usize;
        if n > MAX_VERTICES {
            return Err(invalid("n", raw("n")?, &format!("at most {MAX_VERTICES} vertices are supported")));
        }
        let s = int("s", 2)? as usize;
        let t = int("t", 2)? as usize;
        let heuristic: HeuristicKind = raw("heuristic")?
            .parse()
            .map_err(|e: String| invalid("heuristic", raw("heuristic").unwrap_or(""), &e))?;
        let starting_graph: StartMode = raw("starting_graph")?
            .parse()
            .map_err(|e: String| invalid("starting_graph", raw("starting_graph").unwrap_or(""), &e))?;
        let starting_graph_path = path("starting_graph_path")?;
        if matches!(starting_graph, StartMode::FromPrior | StartMode::FromCurrent) && starting_graph_path.is_none() {
            return Err(ConfigError::MissingKey("starting_graph_path"));
        }
        if starting_graph == StartMode::FromPrior && n < 2 {
            return Err(invalid("n", raw("n")?, "FROM_PRIOR needs n >= 2"));
        }
        let alpha = real("alpha")?;
        if !(0.0..=1.0).contains(&alpha) {
            return Err(invalid("alpha", raw("alpha")?, "must lie in [0, 1]"));
        }
        let learning_rate = real("learning_rate")?;
        if learning_rate <= 0.0 {
            return Err(invalid("learning_rate", raw("learning_rate")?, "must be positive"));
        }
        let loss_info = raw("loss_info")?.to_ascii_lowercase();
        if loss_info != "binary_crossentropy" {
            return Err(invalid("loss_info", raw("loss_info")?, "only binary_crossentropy is supported"));
        }
        let model_raw = raw("model")?;
        let model: Vec<usize> = model_raw
            .split(',')
            .map(|w| w.trim().parse::<usize>().ok().filter(|&w| w > 0))
            .collect::<Option<_>>()
            .ok_or_else(|| invalid("model", model_raw, "expected comma-separated positive layer widths"))?;
        let pretrain = flag("pretrain")?;
        let pretrain_data: Vec<PathBuf> = raw("pretrain_data")?
            .split(',')
            .map(str::trim)
            .filter(|p| !p.is_empty())
            .map(PathBuf::from)
            .collect();
        if pretrain && pretrain_data.is_empty() {
            return Err(ConfigError::MissingKey("pretrain_data"));
        }
        let seed_raw = raw("seed")?;
        let seed: u64 = seed_raw.parse().map_err(|_| invalid("seed", seed_raw, "expected a non-negative integer"))?;

        Ok(RunConfig {
            n,
            s,
            t,
            heuristic,
            starting_graph,
            starting_graph_path,
            starting_graph_index: int("starting_graph_index", 0)? as usize,
            starting_edges: flag("starting_edges")?,
            iter_batch: int("iter_batch", 1)? as usize,
            iter_batches: opt_int("iter_batches")?,
            load_model: path("load_model")?,
            profiler: flag("profiler")?,
            pretrain,
            pretrain_data,
            training_epochs: int("training_epochs", 1)? as usize,
            epochs: int("epochs", 1)? as usize,
            batch_size: int("batch_size", 1)? as usize,
            loss_info,
            alpha,
            model,
            learning_rate,
            seed,
            output_dir: PathBuf::from(raw("output_dir")?),
            past_cap: opt_int("past_cap")?,
            edge_bounds: path("edge_bounds")?,
            parallel: flag("parallel")?,
        })
    }
}

/// Reads and validates a config file.
pub fn load_config(path: &Path) -> Result<RunConfig, ConfigError> {
    ConfigBuilder::new().parse_file(path)?.build()
}
