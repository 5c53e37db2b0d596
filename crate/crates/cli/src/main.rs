//! `jwr`: generate, validate, analyze and attack jittered sampling schedules.
//!
//! Exit codes: 0 success, 2 invalid input, 3 I/O failure, 4 insufficient
//! data. Diagnostics go to standard error; standard output stays empty.

mod commands;
mod error;
mod manifest;
mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use jwr_core::adversary::AttackSpec;
use jwr_core::{SamplingConfig, Strategy};

use commands::analyze::{AnalyzeInput, AnalyzeJob, Format, Which};
use commands::attack::AttackJob;
use commands::generate::GenerateJob;
use commands::sweep::{Grid, SweepJob};
use error::{CliError, Result};
use manifest::{run_and_record, Job, RunManifest};
use output::read_json;

#[derive(Debug, Parser)]
#[command(
    name = "jwr",
    version,
    about = "Jittering-with-reflection frame sampling"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write a schedule file.
    Generate(GenerateArgs),
    /// Check a sampling config and list every violated invariant.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
    /// Marginal, autocorrelation, gap or spectral report.
    Analyze(AnalyzeArgs),
    /// Miss-probability curve of a strategy against an attack.
    Attack(AttackArgs),
    /// Run a parameter grid and write per-cell reports plus an aggregate CSV.
    Sweep(SweepArgs),
    /// Re-run the job recorded in a manifest.
    Replay {
        #[arg(long)]
        manifest: PathBuf,
        /// Write to a different location instead of the recorded one.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
struct GenerateArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long, default_value = "jwr")]
    strategy: Strategy,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct AnalyzeArgs {
    #[arg(long, value_enum)]
    which: Which,
    /// Schedule file to analyze.
    #[arg(long, conflicts_with = "config")]
    schedule: Option<PathBuf>,
    /// Config to generate from instead of a schedule file.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value = "jwr")]
    strategy: Strategy,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Length of the generated schedule.
    #[arg(long, default_value_t = 1_000_000)]
    n: usize,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    #[arg(long, default_value_t = 10)]
    max_lag: usize,
    /// Highest Fourier frequency reported.
    #[arg(long, default_value_t = 64)]
    max_k: i64,
    /// Steps of the total-variation series.
    #[arg(long, default_value_t = 200)]
    steps: usize,
    /// Independent schedules for the marginal test.
    #[arg(long, default_value_t = 100_000)]
    trials: usize,
    /// Step indices tested by the marginal test.
    #[arg(long, value_delimiter = ',', default_values_t = [0u64, 1, 5, 50])]
    indices: Vec<u64>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct AttackArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long, default_value = "jwr")]
    strategy: Strategy,
    /// Attack spec JSON file.
    #[arg(long)]
    attack: PathBuf,
    #[arg(long, default_value_t = 10_000)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Largest horizon; overrides the one in the attack spec.
    #[arg(long)]
    horizon: Option<f64>,
    /// Explicit horizons, comma separated.
    #[arg(long, value_delimiter = ',')]
    horizons: Vec<f64>,
    /// Add the exact miss probability column (discrete mode).
    #[arg(long)]
    exact: bool,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct SweepArgs {
    /// Grid JSON: `{"alphas": [...]}` and/or `{"cells": [{"t": .., "t_p": ..}]}`.
    #[arg(long)]
    grid: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
}

fn load_config(path: &Path) -> Result<SamplingConfig> {
    read_json(path)
}

fn run(cli: Cli) -> Result<()> {
    let job = match cli.command {
        Command::Validate { config } => {
            let cfg = load_config(&config)?;
            cfg.validate()?;
            eprintln!("{}: valid {} config", config.display(), cfg.mode);
            return Ok(());
        }
        Command::Replay { manifest, out } => {
            let recorded: RunManifest = read_json(&manifest)?;
            let mut job = recorded.job;
            if let Some(out) = out {
                job.set_out(out);
            }
            job
        }
        Command::Generate(a) => Job::Generate(GenerateJob {
            config: load_config(&a.config)?,
            strategy: a.strategy,
            seed: a.seed,
            n: a.n,
            out: a.out,
        }),
        Command::Analyze(a) => {
            let input = match (a.schedule, a.config) {
                (Some(path), None) => AnalyzeInput::Schedule { path },
                (None, Some(config)) => AnalyzeInput::Config {
                    config: load_config(&config)?,
                    strategy: a.strategy,
                    n: a.n,
                },
                _ => {
                    return Err(CliError::invalid(
                        "pass exactly one of --schedule or --config",
                    ))
                }
            };
            Job::Analyze(AnalyzeJob {
                input,
                which: a.which,
                format: a.format,
                seed: a.seed,
                max_lag: a.max_lag,
                max_k: a.max_k,
                steps: a.steps,
                trials: a.trials,
                indices: a.indices,
                out: a.out,
            })
        }
        Command::Attack(a) => {
            let mut attack: AttackSpec = read_json(&a.attack)?;
            if let Some(u) = a.horizon {
                attack = attack.with_horizon(u);
            }
            Job::Attack(AttackJob {
                config: load_config(&a.config)?,
                strategy: a.strategy,
                attack,
                trials: a.trials,
                seed: a.seed,
                horizons: a.horizons,
                exact: a.exact,
                out: a.out,
            })
        }
        Command::Sweep(a) => Job::Sweep(SweepJob {
            grid: read_json::<Grid>(&a.grid)?,
            seed: a.seed,
            out: a.out,
        }),
    };
    run_and_record(job).map(|_| ())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            // Help and version text are the only things printed to stdout.
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
