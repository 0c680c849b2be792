//! `catgen <command> --config <path> [--out <dir>] [--numeric|--analytic] [--tolerance <float>]`
//!
//! Exit codes: 0 success, 1 usage or config error, 2 domain error,
//! 3 improbable outcome or impossible event, 4 comparison above tolerance.
//! Every run that gets as far as an output directory writes
//! `summary.json` there, including failed ones.

mod commands;
pub mod scenario;

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Parser, ValueEnum};

use crate::error::Error;
pub use commands::Report;
pub use scenario::Scenario;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    /// Conditioned state (or mixture) and its heralding probability.
    Generate,
    /// Count-probability table: closed form, general sum, full pipeline.
    Probability,
    /// Quadrature, Wigner and Husimi surfaces.
    Grid,
    /// Detector response matrix and posterior for the configured count.
    Detector,
    /// Closed forms against the numerical route.
    Compare,
}

#[derive(Debug, Parser)]
#[command(
    name = "catgen",
    version,
    about = "Photon-added and photon-subtracted states from conditional beam-splitter measurements"
)]
pub struct Args {
    #[arg(value_enum)]
    pub command: Command,
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory; defaults to `output.dir` from the config, then `catgen-out`.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, conflicts_with = "analytic")]
    pub numeric: bool,
    #[arg(long)]
    pub analytic: bool,
    /// Maximum allowed deviation in `compare`.
    #[arg(long)]
    pub tolerance: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Analytic,
    Numeric,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Core(#[from] Error),
    #[error("deviation {deviation:e} in {quantity} exceeds tolerance {tolerance:e}")]
    Tolerance {
        quantity: String,
        deviation: f64,
        tolerance: f64,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io(_) => 1,
            CliError::Core(Error::ImprobableOutcome { .. } | Error::ImpossibleEvent { .. }) => 3,
            CliError::Core(_) => 2,
            CliError::Tolerance { .. } => 4,
        }
    }
}

/// Parses `args` (program name first) and runs; returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    match Args::try_parse_from(args) {
        Ok(args) => run(&args),
        Err(e) => {
            let _ = e.print();
            if e.use_stderr() {
                1
            } else {
                0
            }
        }
    }
}

pub fn run(args: &Args) -> i32 {
    let scenario = match Scenario::load(&args.config) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("catgen: {e}");
            return e.exit_code();
        }
    };
    let out = args
        .out
        .clone()
        .or_else(|| scenario.output.dir.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("catgen-out"));
    let mode = match select_mode(args, &scenario) {
        Ok(m) => m,
        Err(e) => return finish(&out, args.command, None, &scenario, Err(e)),
    };
    let tolerance = args.tolerance.unwrap_or(scenario.numerics.tolerance);
    log::info!("running {:?} in {:?} mode", args.command, mode);
    let result = commands::execute(args.command, &scenario, mode, tolerance);
    finish(&out, args.command, Some(mode), &scenario, result)
}

fn select_mode(args: &Args, scenario: &Scenario) -> Result<Mode, CliError> {
    if args.numeric {
        Ok(Mode::Numeric)
    } else if args.analytic || scenario.is_squeezed_vacuum() {
        if !scenario.is_squeezed_vacuum() {
            return Err(CliError::Config(
                "closed forms exist for squeezed-vacuum input only".into(),
            ));
        }
        Ok(Mode::Analytic)
    } else {
        Ok(Mode::Numeric)
    }
}

/// Writes the report files and `summary.json`, returning the exit code.
fn finish(
    out: &Path,
    command: Command,
    mode: Option<Mode>,
    scenario: &Scenario,
    result: Result<Report, CliError>,
) -> i32 {
    let (report, failure) = match result {
        Ok(r) => {
            let failure = r.failure.clone();
            (r, failure)
        }
        Err(e) => (Report::default(), Some(e.to_string()).map(|m| (e.exit_code(), m))),
    };
    let (code, message) = failure.unwrap_or((0, "ok".to_string()));
    if code != 0 {
        eprintln!("catgen: {message}");
    }
    let summary = serde_json::json!({
        "command": command,
        "mode": mode,
        "scenario": scenario,
        "probabilities": report.probabilities,
        "deviations": report.deviations,
        "files": report.files.iter().map(|(name, _)| name).collect::<Vec<_>>(),
        "exit": { "code": code, "message": message },
    });
    let written = std::fs::create_dir_all(out).and_then(|_| {
        for (name, contents) in &report.files {
            std::fs::write(out.join(name), contents)?;
        }
        let mut text = serde_json::to_string_pretty(&summary).expect("summary serializes");
        text.push('\n');
        std::fs::write(out.join("summary.json"), text)
    });
    match written {
        Ok(()) => code,
        Err(e) => {
            eprintln!("catgen: cannot write to {}: {e}", out.display());
            if code == 0 {
                1
            } else {
                code
            }
        }
    }
}
