//! Batch front end for `fdpvar-core`: a TOML-configured command line that
//! reads test statistics and correlation matrices from disk and writes JSON
//! or CSV reports.
//!
//! Exit codes: 0 success, 2 input or configuration error, 3 numerical
//! failure, 4 property violation (from `signcheck`).

pub mod commands;
pub mod config;
pub mod error;
pub mod formats;

use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

use crate::config::{Format, RunConfig};
use crate::error::{CliError, CliResult, EXIT_OK};

/// Environment variable that overrides the configured worker count.
pub const WORKERS_ENV: &str = "FDP_WORKERS";

#[derive(Debug, Parser)]
#[command(name = "fdpvar", version, about = "Asymptotic mean and variance of the false discovery proportion")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// TOML run configuration.
    #[arg(long, short, global = true)]
    pub config: Option<PathBuf>,
    /// Overrides the configured seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads; takes precedence over FDP_WORKERS and the config.
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    /// Report path; stdout when absent.
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<FormatArg>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum FormatArg {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, Subcommand)]
pub enum Command {
    /// V1 + V2 decomposition from μ, null mask and Σ files.
    Variance,
    /// Plug-in variance from observed statistics under each π0 method.
    Estimate,
    /// Simulation studies over models M1–M7.
    Simulate,
    /// Sweeps the covariance-sign predicates against exact covariances.
    Signcheck,
    /// Finite-p diagnostics of the dependence conditions.
    Conditions,
    /// Writes a model's post-PFA correlation matrix.
    Sigma,
}

impl Command {
    fn needs_config(self) -> bool {
        !matches!(self, Command::Simulate | Command::Signcheck)
    }
}

/// Flag, then environment, then config; `None` leaves rayon's default.
fn resolve_workers(flag: Option<usize>, cfg: &RunConfig) -> CliResult<Option<usize>> {
    let env = match std::env::var(WORKERS_ENV) {
        Ok(v) => {
            Some(v.trim().parse::<usize>().map_err(|_| CliError::Config(format!("{WORKERS_ENV}={v} is not a count")))?)
        }
        Err(_) => None,
    };
    let w = flag.or(env).or(cfg.workers);
    if w == Some(0) {
        return Err(CliError::Config("worker count must be at least 1".into()));
    }
    Ok(w)
}

fn execute(cli: &Cli) -> CliResult<()> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None if cli.command.needs_config() => {
            return Err(CliError::Config(format!("{:?} requires --config", cli.command).to_lowercase()))
        }
        None => RunConfig::default(),
    };
    if cli.seed.is_some() {
        cfg.seed = cli.seed;
    }
    if cli.output.is_some() {
        cfg.output = cli.output.clone();
    }
    if let Some(f) = cli.format {
        cfg.format = Some(match f {
            FormatArg::Json => Format::Json,
            FormatArg::Csv => Format::Csv,
        });
    }
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(w) = resolve_workers(cli.workers, &cfg)? {
        pool = pool.num_threads(w);
    }
    let pool = pool.build().map_err(|e| CliError::Config(format!("cannot start worker pool: {e}")))?;
    pool.install(|| match cli.command {
        Command::Variance => commands::cmd_variance(&cfg),
        Command::Estimate => commands::cmd_estimate(&cfg),
        Command::Simulate => commands::cmd_simulate(&cfg),
        Command::Signcheck => commands::cmd_signcheck(&cfg),
        Command::Conditions => commands::cmd_conditions(&cfg),
        Command::Sigma => commands::cmd_sigma(&cfg),
    })
}

/// Runs a parsed command line and returns the process exit code.
pub fn run(cli: &Cli) -> i32 {
    match execute(cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("fdpvar: {e}");
            e.exit_code()
        }
    }
}
