//! `bridgelab`: closed-form oracles, path simulation, Monte Carlo
//! verification suites and figure data for Wiener and OU bridges.
//!
//! Exit codes: 0 success, 1 verification failure, 2 usage error, 3 domain
//! error, 4 I/O error.

mod jobs;
mod manifest;
mod oracle;
mod params;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Parser, Subcommand};

use jobs::{Figure, Job};
use manifest::{manifest_path, now_unix, RunManifest};
use params::Params;

/// A malformed invocation: unknown id, missing or invalid parameter.
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

#[derive(Parser)]
#[command(name = "bridgelab", version, about = "Wiener and Ornstein-Uhlenbeck bridges: oracles, simulation and verification")]
struct Cli {
    /// JSON file of flag values; flags given on the command line win.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a closed-form statistic.
    Oracle {
        /// Statistic id; see --list.
        id: Option<String>,
        /// List the registry.
        #[arg(long)]
        list: bool,
        #[command(flatten)]
        params: Params,
    },
    /// Sample the process and its three bridges from shared drivers.
    Simulate {
        #[command(flatten)]
        params: Params,
    },
    /// Run a Monte Carlo verification suite and write its JSON report.
    Verify {
        #[command(flatten)]
        params: Params,
    },
    /// Write the data behind a figure.
    Export {
        figure: Figure,
        #[command(flatten)]
        params: Params,
    },
    /// Work with run manifests.
    Manifest {
        #[command(subcommand)]
        action: ManifestAction,
    },
}

#[derive(Subcommand)]
enum ManifestAction {
    /// Re-run a manifest and compare output digests.
    Replay {
        manifest: PathBuf,
        /// Write the outputs here instead of over the originals.
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
}

/// Prints a line to stdout, ignoring a closed pipe.
pub fn say(text: &str) {
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "{text}");
}

fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if cause.is::<UsageError>() {
            return 2;
        }
        if cause.is::<bridgelab_core::Error>() {
            return 3;
        }
        if cause.is::<std::io::Error>() {
            return 4;
        }
    }
    1
}

fn with_config(config: &Option<PathBuf>, flags: Params) -> Result<Params> {
    match config {
        Some(path) => Ok(flags.over(Params::load(path)?)),
        None => Ok(flags),
    }
}

/// Runs a job and records a manifest next to its main output.
fn run_job(job: Job) -> Result<ExitCode> {
    let started = now_unix();
    let outcome = job.run()?;
    if let Some(main) = outcome.outputs.first() {
        RunManifest::record(&job, &outcome.outputs, started)?.write(&manifest_path(main))?;
    }
    Ok(if outcome.passed { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Oracle { id, list, params } => {
            if list {
                say(&oracle::listing());
                return Ok(ExitCode::SUCCESS);
            }
            let id = id.ok_or_else(|| UsageError("missing statistic id (see --list)".into()))?;
            let entry = oracle::lookup(&id).ok_or_else(|| UsageError(format!("unknown statistic id {id:?} (see --list)")))?;
            let params = with_config(&cli.config, params)?;
            say(&oracle::render(&entry.evaluate(&params)?));
            Ok(ExitCode::SUCCESS)
        }
        Command::Simulate { params } => run_job(Job::simulate(with_config(&cli.config, params)?)?),
        Command::Verify { params } => run_job(Job::verify(with_config(&cli.config, params)?)?),
        Command::Export { figure, params } => run_job(Job::export(figure, with_config(&cli.config, params)?)?),
        Command::Manifest { action: ManifestAction::Replay { manifest, out_dir } } => {
            let m = RunManifest::load(&manifest)?;
            let results = manifest::replay(&m, out_dir.as_deref())?;
            let mut all = true;
            for r in &results {
                let same = r.expected == r.actual;
                all &= same;
                say(&format!("{} {}", if same { "identical" } else { "DIFFERS" }, r.path.display()));
            }
            Ok(if all { ExitCode::SUCCESS } else { ExitCode::from(1) })
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => e.exit(),
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
