use anyhow::{bail, Context, Result};
use clap::{Arg, ArgMatches, CommandFactory, FromArgMatches, Parser, Subcommand};
use ramsey_core::census::{full_census, ClassId, FeatureVector};
use ramsey_core::graph6;
use ramsey_core::heuristics::pretrain::{generate_rows, GenerateOptions};
use ramsey_core::heuristics::write_pretrain_csv;
use ramsey_core::runlog::{ConfigBuilder, KEYS};
use ramsey_core::verifier::{RamseyParams, Verifier};
use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;

const EXIT_USAGE: u8 = 1;
const EXIT_RUNTIME: u8 = 2;

/// Search for Ramsey counterexamples and inspect graphs.
#[derive(Debug, Parser)]
#[command(name = "ramsey", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a search. Every config key is also a flag (`--iter-batch 20`);
    /// flags override the config file.
    Run {
        /// Config file of `key = value` lines.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Extra `key=value` overrides, applied last.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
    },
    /// Check whether each graph in a graph6 file is an R(s,t,n) counterexample.
    Verify {
        #[arg(long)]
        s: usize,
        #[arg(long)]
        t: usize,
        /// graph6 file, or `-` for stdin.
        file: PathBuf,
    },
    /// Print the 4-vertex induced subgraph census of each graph.
    Census {
        /// Also print the scaled feature vector for this `s` (needs `--t`).
        #[arg(long, requires = "t")]
        s: Option<usize>,
        #[arg(long, requires = "s")]
        t: Option<usize>,
        /// graph6 file, or `-` for stdin.
        file: PathBuf,
    },
    /// Write labeled census rows for small graphs as pretraining CSV.
    GenPretrain {
        #[arg(long, default_value_t = 4)]
        n_min: usize,
        #[arg(long, default_value_t = 9)]
        n_max: usize,
        #[arg(long, default_value_t = 3)]
        s_min: usize,
        #[arg(long, default_value_t = 3)]
        s_max: usize,
        #[arg(long, default_value_t = 3)]
        t_min: usize,
        #[arg(long, default_value_t = 5)]
        t_max: usize,
        /// Keep only counterexample rows.
        #[arg(long)]
        counters_only: bool,
        /// Output file; stdout when absent.
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
}

fn flag_name(key: &str) -> String {
    format!("cfg-{}", key.replace('_', "-"))
}

fn command() -> clap::Command {
    Cli::command().mut_subcommand("run", |mut run| {
        for (key, default, help) in KEYS {
            let help = match default {
                Some(d) if !d.is_empty() => format!("{help} [default: {d}]"),
                _ => help.to_string(),
            };
            run = run.arg(
                Arg::new(flag_name(key))
                    .long(key.replace('_', "-"))
                    .value_name("VALUE")
                    .help(help)
                    .help_heading("Config keys"),
            );
        }
        run
    })
}

fn open_input(path: &Path) -> Result<Box<dyn BufRead>> {
    if path == Path::new("-") {
        return Ok(Box::new(BufReader::new(io::stdin())));
    }
    let file = File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
    Ok(Box::new(BufReader::new(file)))
}

fn run_search(matches: &ArgMatches, config: Option<PathBuf>, set: Vec<String>) -> Result<()> {
    let mut builder = ConfigBuilder::new();
    if let Some(path) = config {
        builder = builder.parse_file(&path)?;
    }
    for (key, _, _) in KEYS {
        if let Some(value) = matches.get_one::<String>(&flag_name(key)) {
            builder = builder.set(key, value)?;
        }
    }
    for pair in &set {
        let Some((key, value)) = pair.split_once('=') else {
            bail!("--set expects KEY=VALUE, got `{pair}`");
        };
        builder = builder.set(key, value)?;
    }
    let config = builder.build()?;

    let interrupted = Arc::new(AtomicBool::new(false));
    let flag = Arc::clone(&interrupted);
    ctrlc::set_handler(move || flag.store(true, Ordering::SeqCst)).context("installing interrupt handler")?;

    let started = std::time::Instant::now();
    let result = ramsey_core::run(&config, Some(&interrupted))?;
    println!(
        "status={} iterations={} counters={} wall={:.3}s output={}",
        result.status.name(),
        result.iterations,
        result.counters.len(),
        started.elapsed().as_secs_f64(),
        result.output_dir.display()
    );
    Ok(())
}

fn verify(s: usize, t: usize, file: &Path) -> Result<()> {
    let graphs = graph6::read_all(open_input(file)?)?;
    let mut out = io::stdout().lock();
    for (i, g) in graphs.iter().enumerate() {
        let verifier = Verifier::new(RamseyParams::new(s, t, g.order())?);
        let yes = verifier.is_counterexample(g, &full_census(g));
        let answer = if yes { "yes" } else { "no" };
        if graphs.len() == 1 {
            writeln!(out, "counterexample: {answer}")?;
        } else {
            writeln!(out, "{i}: counterexample: {answer}")?;
        }
    }
    Ok(())
}

fn census(file: &Path, st: Option<(usize, usize)>) -> Result<()> {
    let graphs = graph6::read_all(open_input(file)?)?;
    let mut out = io::stdout().lock();
    for g in &graphs {
        if g.order() < 4 {
            bail!("census needs at least 4 vertices, got {}", g.order());
        }
        let c = full_census(g);
        let fields: Vec<String> = ClassId::ALL.iter().map(|&id| format!("{}={}", id.name(), c.get(id))).collect();
        writeln!(out, "{}", fields.join(" "))?;
        if let Some((s, t)) = st {
            let f = FeatureVector::scaled(c.counts(), g.order(), s, t)?;
            let values: Vec<String> = f.values().iter().map(|v| format!("{v:.6}")).collect();
            writeln!(out, "features: {}", values.join(" "))?;
        }
    }
    Ok(())
}

fn gen_pretrain(opts: GenerateOptions, out: Option<PathBuf>) -> Result<()> {
    if opts.n_min > opts.n_max || opts.s_range.0 > opts.s_range.1 || opts.t_range.0 > opts.t_range.1 {
        bail!("empty range");
    }
    if opts.s_range.0 < 2 || opts.t_range.0 < 2 {
        bail!("s and t must be at least 2");
    }
    if opts.n_max > 10 {
        bail!("n-max above 10 is not supported by the exhaustive generator");
    }
    let rows = generate_rows(&opts);
    match out {
        Some(path) => {
            let file = File::create(&path).with_context(|| format!("cannot create {}", path.display()))?;
            write_pretrain_csv(&rows, BufWriter::new(file))?;
            eprintln!("wrote {} rows to {}", rows.len(), path.display());
        }
        None => write_pretrain_csv(&rows, io::stdout().lock())?,
    }
    Ok(())
}

fn main() -> ExitCode {
    let matches = match command().try_get_matches() {
        Ok(m) => m,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let cli = match Cli::from_arg_matches(&matches) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(EXIT_USAGE);
        }
    };
    let result = match cli.command {
        Command::Run { config, set } => {
            let sub = matches.subcommand_matches("run").expect("run subcommand matched");
            run_search(sub, config, set)
        }
        Command::Verify { s, t, file } => verify(s, t, &file),
        Command::Census { s, t, file } => census(&file, s.zip(t)),
        Command::GenPretrain { n_min, n_max, s_min, s_max, t_min, t_max, counters_only, out } => gen_pretrain(
            GenerateOptions { n_min, n_max, s_range: (s_min, s_max), t_range: (t_min, t_max), counters_only },
            out,
        ),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            let usage = e.downcast_ref::<ramsey_core::runlog::ConfigError>().is_some();
            ExitCode::from(if usage { EXIT_USAGE } else { EXIT_RUNTIME })
        }
    }
}
