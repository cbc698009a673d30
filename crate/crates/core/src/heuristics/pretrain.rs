//! Labeled census rows for pretraining, their CSV form, and a small-graph
//! generator that produces them.
//!
//! CSV header (fixed): `e4,k2,two_k2,p3,k3,p4,claw,c4,paw,diamond,k4,n,s,t,label`.
//! Counts are raw; scaling happens when a row becomes a [`TrainingExample`].

use super::{HeuristicError, MlpModel, TrainReport, TrainingExample};
use crate::census::{binomial, full_census, ClassCounts, ClassId, FeatureVector, NUM_CLASSES};
use crate::graph::Graph;
use crate::verifier::{RamseyParams, Verifier};
use rand::Rng;
use std::collections::HashSet;
use std::io::Write;
use std::path::Path;

pub const CSV_COLUMNS: usize = NUM_CLASSES + 4;

pub fn csv_header() -> Vec<&'static str> {
    let mut h: Vec<&'static str> = ClassId::ALL.iter().map(|c| c.column()).collect();
    h.extend(["n", "s", "t", "label"]);
    h
}

/// One labeled census.
#[derive(Debug, Clone, PartialEq)]
pub struct PretrainRow {
    pub counts: ClassCounts,
    pub n: usize,
    pub s: usize,
    pub t: usize,
    pub label: f64,
}

impl PretrainRow {
    pub fn to_example(&self, scaled: bool) -> Result<TrainingExample, HeuristicError> {
        let features = if scaled {
            FeatureVector::scaled(&self.counts, self.n, self.s, self.t)?
        } else {
            FeatureVector::unscaled(&self.counts)
        };
        Ok(TrainingExample::new(features, self.label))
    }
}

fn parse_record(record: &csv::StringRecord, path: &str, line: usize) -> Result<PretrainRow, HeuristicError> {
    let bad = |reason: String| HeuristicError::BadPretrainRow { path: path.to_string(), line, reason };
    if record.len() != CSV_COLUMNS {
        return Err(bad(format!("expected {CSV_COLUMNS} columns, found {}", record.len())));
    }
    let int = |i: usize| -> Result<u64, HeuristicError> {
        record[i].trim().parse::<u64>().map_err(|_| bad(format!("column {} is not a non-negative integer: `{}`", i + 1, &record[i])))
    };
    let mut counts = ClassCounts::default();
    for i in 0..NUM_CLASSES {
        counts.0[i] = int(i)?;
    }
    let (n, s, t) = (int(11)? as usize, int(12)? as usize, int(13)? as usize);
    let label: f64 = record[14].trim().parse().map_err(|_| bad(format!("label is not a number: `{}`", &record[14])))?;
    if !(0.0..=1.0).contains(&label) {
        return Err(bad(format!("label {label} outside [0, 1]")));
    }
    let expected = binomial(n as u64, 4);
    if counts.total() != expected {
        return Err(bad(format!("counts sum to {} but C({n}, 4) = {expected}", counts.total())));
    }
    Ok(PretrainRow { counts, n, s, t, label })
}

/// Reads a pretraining CSV. Line numbers in errors are 1-based file lines.
pub fn read_pretrain_rows(path: &Path) -> Result<Vec<PretrainRow>, HeuristicError> {
    let shown = path.display().to_string();
    let file = std::fs::File::open(path).map_err(|e| HeuristicError::PretrainIo { path: shown.clone(), source: e })?;
    let mut reader = csv::ReaderBuilder::new().has_headers(false).flexible(true).from_reader(file);
    let mut rows = Vec::new();
    let mut header_seen = false;
    for result in reader.records() {
        let record = result.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            HeuristicError::BadPretrainRow { path: shown.clone(), line, reason: e.to_string() }
        })?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        if !header_seen {
            let got: Vec<&str> = record.iter().map(str::trim).collect();
            if got != csv_header() {
                return Err(HeuristicError::BadPretrainRow {
                    path: shown,
                    line,
                    reason: format!("header must be `{}`", csv_header().join(",")),
                });
            }
            header_seen = true;
            continue;
        }
        rows.push(parse_record(&record, &shown, line)?);
    }
    if !header_seen {
        return Err(HeuristicError::BadPretrainRow { path: shown, line: 1, reason: "missing header".into() });
    }
    Ok(rows)
}

/// Reads a pretraining CSV into examples for a scaled or unscaled model.
pub fn load_pretrain_csv(path: &Path, scaled: bool) -> Result<Vec<TrainingExample>, HeuristicError> {
    read_pretrain_rows(path)?.iter().map(|r| r.to_example(scaled)).collect()
}

pub fn write_pretrain_csv<W: Write>(rows: &[PretrainRow], w: W) -> std::io::Result<()> {
    let mut writer = csv::Writer::from_writer(w);
    writer.write_record(csv_header())?;
    for r in rows {
        let mut fields: Vec<String> = r.counts.0.iter().map(|c| c.to_string()).collect();
        fields.extend([r.n.to_string(), r.s.to_string(), r.t.to_string(), format!("{:?}", r.label)]);
        writer.write_record(&fields)?;
    }
    writer.flush()
}

/// Trains `model` over the whole dataset for `training_epochs` epochs.
pub fn pretrain<R: Rng + ?Sized>(
    model: &mut MlpModel,
    dataset: &[TrainingExample],
    training_epochs: usize,
    batch_size: usize,
    rng: &mut R,
) -> Result<TrainReport, HeuristicError> {
    model.train(dataset, training_epochs, batch_size, rng)
}

/// Options for [`generate_rows`].
#[derive(Debug, Clone)]
pub struct GenerateOptions {
    pub n_min: usize,
    pub n_max: usize,
    pub s_range: (usize, usize),
    pub t_range: (usize, usize),
    /// Keep only rows labeled as counterexamples.
    pub counters_only: bool,
}

impl Default for GenerateOptions {
    fn default() -> Self {
        GenerateOptions { n_min: 4, n_max: 9, s_range: (3, 3), t_range: (3, 5), counters_only: false }
    }
}

/// Graphs on `n` vertices with pairwise distinct (census, degree sequence),
/// grown one vertex at a time from the representatives on `n - 1` vertices.
fn extend_frontier(frontier: &[Graph]) -> Vec<Graph> {
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for g in frontier {
        let base = g.with_extra_vertex().expect("order stays small");
        let new_v = base.order() - 1;
        for mask in 0u64..(1 << new_v) {
            let mut h = base.clone();
            for u in (0..new_v).filter(|u| mask >> u & 1 == 1) {
                h.toggle(h.edge(u, new_v).unwrap());
            }
            let mut degrees = h.degrees();
            degrees.sort_unstable();
            if seen.insert((full_census(&h).key(), degrees)) {
                out.push(h);
            }
        }
    }
    out
}

/// One row per distinct census on each order in `n_min..=n_max` and each
/// `(s, t)` in the ranges, labeled 1 for `R(s, t, n)` counterexamples and 0
/// otherwise.
pub fn generate_rows(opts: &GenerateOptions) -> Vec<PretrainRow> {
    let mut rows = Vec::new();
    let mut frontier = vec![Graph::new(1).unwrap()];
    for n in 2..=opts.n_max {
        frontier = extend_frontier(&frontier);
        if n < opts.n_min.max(4) {
            continue;
        }
        let mut keys = HashSet::new();
        let distinct: Vec<(Graph, _)> = frontier
            .iter()
            .map(|g| (g.clone(), full_census(g)))
            .filter(|(_, c)| keys.insert(c.key()))
            .collect();
        for s in opts.s_range.0..=opts.s_range.1 {
            for t in opts.t_range.0..=opts.t_range.1 {
                let verifier = Verifier::new(RamseyParams::new(s, t, n).expect("validated ranges"));
                for (g, census) in &distinct {
                    let is_counter = verifier.is_counterexample(g, census);
                    if opts.counters_only && !is_counter {
                        continue;
                    }
                    rows.push(PretrainRow { counts: *census.counts(), n, s, t, label: f64::from(u8::from(is_counter)) });
                }
            }
        }
    }
    rows
}
