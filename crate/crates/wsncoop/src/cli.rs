//! Command-line front end.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Parser, Subcommand, ValueEnum};
use thiserror::Error;
use wsncoop_core::engine::{compare, run, Mode, RunOutput, Scenario, ValidationIssue};
use wsncoop_core::reasoning::OperationLevel;

use crate::load::{render_issues, resolve_scenario, LoadError};
use crate::output;

pub const EXIT_VALIDATION: u8 = 2;
pub const EXIT_IO: u8 = 3;

#[derive(Debug, Parser)]
#[command(name = "wsncoop", version, about = "Simulate cooperating wireless sensor networks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one scenario and write its metrics.
    Simulate(SimulateArgs),
    /// Run cooperative and baseline modes and write a comparison.
    Compare(CompareArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Cooperative,
    Isolated,
}

/// `adaptive` or `static:<level>`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Baseline {
    Adaptive,
    Static(OperationLevel),
}

impl FromStr for Baseline {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.eq_ignore_ascii_case("adaptive") {
            return Ok(Baseline::Adaptive);
        }
        let level =
            s.strip_prefix("static:").ok_or_else(|| format!("expected adaptive or static:<level>, got {s:?}"))?;
        level.parse().map(Baseline::Static).map_err(|e| format!("{e}: {level:?}"))
    }
}

impl Baseline {
    pub fn mode(self) -> Mode {
        match self {
            Baseline::Adaptive => Mode::Isolated,
            Baseline::Static(level) => Mode::Static(level),
        }
    }
}

#[derive(Debug, clap::Args)]
pub struct SimulateArgs {
    /// Scenario file, or the name of a bundled scenario.
    #[arg(long)]
    pub scenario: String,
    #[arg(long, value_enum)]
    pub mode: ModeArg,
    #[arg(long)]
    pub seed: u64,
    /// Metrics CSV destination.
    #[arg(long)]
    pub out: PathBuf,
    /// Summary JSON destination.
    #[arg(long)]
    pub summary: Option<PathBuf>,
    /// Isolated-mode flavour; only valid with `--mode isolated`.
    #[arg(long)]
    pub baseline: Option<Baseline>,
    /// Final global lookup table as CSV.
    #[arg(long)]
    pub glt: Option<PathBuf>,
    /// Final cooperating-networks tables as CSV.
    #[arg(long)]
    pub cnt: Option<PathBuf>,
    /// Ground-truth trace as CSV.
    #[arg(long)]
    pub trace: Option<PathBuf>,
}

#[derive(Debug, clap::Args)]
pub struct CompareArgs {
    #[arg(long)]
    pub scenario: String,
    #[arg(long)]
    pub seed: u64,
    #[arg(long, default_value = "adaptive")]
    pub baseline: Baseline,
    /// Comparison JSON destination; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Load(#[from] LoadError),
    #[error("scenario rejected:\n{}", render_issues(.0))]
    Invalid(Vec<ValidationIssue>),
    #[error("cannot write {}: {source}", path.display())]
    Write { path: PathBuf, source: std::io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Invalid(_) => EXIT_VALIDATION,
            CliError::Load(LoadError::Invalid(_)) => EXIT_VALIDATION,
            CliError::Load(LoadError::Io { .. }) | CliError::Write { .. } => EXIT_IO,
        }
    }
}

fn write(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    output::write_atomic(path, bytes).map_err(|source| CliError::Write { path: path.to_path_buf(), source })
}

fn simulate_mode(args: &SimulateArgs) -> Result<Mode, CliError> {
    match (args.mode, args.baseline) {
        (ModeArg::Cooperative, None) => Ok(Mode::Cooperative),
        (ModeArg::Cooperative, Some(_)) => Err(CliError::Usage("--baseline applies only to --mode isolated".into())),
        (ModeArg::Isolated, b) => Ok(b.unwrap_or(Baseline::Adaptive).mode()),
    }
}

fn execute(scenario: &Scenario, seed: u64, mode: Mode) -> Result<RunOutput, CliError> {
    run(scenario, seed, mode).map_err(CliError::Invalid)
}

pub fn simulate(args: &SimulateArgs) -> Result<(), CliError> {
    let mode = simulate_mode(args)?;
    let scenario = resolve_scenario(&args.scenario)?;
    let out = execute(&scenario, args.seed, mode)?;
    write(&args.out, &output::metrics_csv(&out))?;
    if let Some(p) = &args.summary {
        write(p, &output::summary_json(&scenario.name, &out))?;
    }
    if let Some(p) = &args.glt {
        write(p, &output::glt_csv(&out))?;
    }
    if let Some(p) = &args.cnt {
        write(p, &output::cnt_csv(&out))?;
    }
    if let Some(p) = &args.trace {
        write(p, &output::trace_csv(&out))?;
    }
    Ok(())
}

/// Runs both modes side by side and renders the comparison JSON.
pub fn compare_runs(scenario: &Scenario, seed: u64, baseline: Baseline) -> Result<Vec<u8>, CliError> {
    let (coop, base) = std::thread::scope(|s| {
        let coop = s.spawn(|| execute(scenario, seed, Mode::Cooperative));
        let base = execute(scenario, seed, baseline.mode());
        (coop.join().expect("simulation thread panicked"), base)
    });
    let (coop, base) = (coop?, base?);
    let rows = compare(&coop, &base);
    Ok(output::compare_json(&scenario.name, &coop, &base, &rows))
}

pub fn compare_cmd(args: &CompareArgs) -> Result<(), CliError> {
    let scenario = resolve_scenario(&args.scenario)?;
    let json = compare_runs(&scenario, args.seed, args.baseline)?;
    match &args.out {
        Some(p) => write(p, &json),
        None => {
            use std::io::Write;
            std::io::stdout().write_all(&json).map_err(|source| CliError::Write { path: "<stdout>".into(), source })
        }
    }
}

pub fn main_with(cli: Cli) -> ExitCode {
    let result = match &cli.command {
        Command::Simulate(a) => simulate(a),
        Command::Compare(a) => compare_cmd(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("wsncoop: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
