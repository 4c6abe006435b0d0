//! Driver for the transferlab experiment suites: merges flags with an
//! optional config file, runs one experiment, and writes `report.json`
//! together with plot-ready CSV tables.
//!
//! Exit codes: `0` when every check passes, `2` when a check fails (the
//! outputs are still written), `1` on usage or configuration errors.

pub mod args;
pub mod output;
pub mod suites;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use clap::Parser;
use serde_json::Value;
use thiserror::Error;

use transferlab::ExperimentError;

pub use args::{Cli, Command, RunArgs, Timing};
pub use output::{format_g, Check, EcdfTable, Report};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_CHECK_FAILED: i32 = 2;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Experiment(#[from] ExperimentError),
    #[error("cannot write {path}: {message}")]
    Io { path: PathBuf, message: String },
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub report: Report,
    pub report_path: PathBuf,
}

impl RunOutcome {
    pub fn exit_code(&self) -> i32 {
        if self.report.all_pass() {
            EXIT_PASS
        } else {
            EXIT_CHECK_FAILED
        }
    }
}

/// Runs one experiment and writes its outputs.
pub fn execute(args: &RunArgs) -> Result<RunOutcome, CliError> {
    let started = Instant::now();
    let mut params = args::Params::from_args(args)?;
    let experiment = match params.take_silent("experiment") {
        Some(Value::String(s)) if args::EXPERIMENTS.contains(&s.as_str()) => s,
        Some(other) => {
            return Err(CliError::Usage(format!(
                "unknown experiment {other}; expected one of {}",
                args::EXPERIMENTS.join(", ")
            )))
        }
        None => return Err(CliError::Usage("missing --experiment".into())),
    };
    let out = match params.take_silent("out") {
        Some(Value::String(s)) => PathBuf::from(s),
        Some(other) => return Err(CliError::Config(format!("`out` must be a path, got {other}"))),
        None => PathBuf::from("transferlab-out"),
    };
    let workers = match params.take_silent("workers") {
        None => None,
        Some(v) => match v.as_u64() {
            Some(w) if w >= 1 => Some(w as usize),
            _ => return Err(CliError::Config(format!("`workers` must be a positive integer, got {v}"))),
        },
    };
    let timing = match params.take_silent("timing") {
        None => true,
        Some(Value::String(s)) if s == "on" => true,
        Some(Value::String(s)) if s == "off" => false,
        Some(other) => return Err(CliError::Config(format!("`timing` must be on or off, got {other}"))),
    };

    let suite = suites::run(&experiment, &mut params, workers)?;
    let mut config = params.echo();
    config.insert("experiment".into(), Value::from(experiment));
    let report = Report {
        config,
        seed: suite.seed,
        checks: suite.checks,
        metrics: suite.metrics,
        runtime_seconds: timing.then(|| started.elapsed().as_secs_f64()),
    };
    let report_path = output::write_outputs(&out, &report, &suite.tables)?;
    Ok(RunOutcome { report, report_path })
}

/// Parses `argv` (program name first), runs, prints a summary, and returns
/// the process exit code.
pub fn run_main<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_PASS };
        }
    };
    let Command::Run(args) = cli.command;
    match execute(&args) {
        Ok(outcome) => {
            // a closed pipe must not turn a finished run into a panic
            let mut out = std::io::stdout().lock();
            for check in &outcome.report.checks {
                let _ = writeln!(
                    out,
                    "{:<40} {:>14} critical {:>14}  {}",
                    check.name,
                    format_g(check.statistic),
                    format_g(check.critical),
                    if check.pass { "PASS" } else { "FAIL" }
                );
            }
            let _ = writeln!(out, "report: {}", outcome.report_path.display());
            outcome.exit_code()
        }
        Err(e) => {
            eprintln!("error: {e}");
            if matches!(e, CliError::Usage(_)) {
                eprintln!("usage: transferlab run --experiment <{}> [options]", args::EXPERIMENTS.join("|"));
            }
            EXIT_USAGE
        }
    }
}
