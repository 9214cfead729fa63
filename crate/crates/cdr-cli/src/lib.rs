//! `cdr` — simulate, train, route, and report on complexity-aware routing
//! between fast and deliberate reasoning strategies.

pub mod config;
pub mod error;
pub mod plot;
pub mod report;
pub mod route;
pub mod simulate;
pub mod train;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

use crate::config::AppConfig;
use crate::error::CliResult;

#[derive(Debug, Parser)]
#[command(
    name = "cdr",
    version,
    about = "Route queries between fast and deliberate reasoning strategies"
)]
pub struct Cli {
    /// Configuration file (TOML); defaults apply when omitted.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,

    /// Master seed override; every stream in a run derives from it.
    #[arg(long, global = true, value_name = "U64")]
    pub seed: Option<u64>,

    /// Output directory override.
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,

    /// Suppress progress and summary output (artifacts are still written).
    #[arg(long, global = true)]
    pub quiet: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate corpora, train all policies, benchmark every baseline, and
    /// write the full artifact set.
    Simulate(simulate::SimulateArgs),
    /// Route a query file through a trained policy at a fixed threshold.
    Route(route::RouteArgs),
    /// Fit one routing policy to a labeled corpus file.
    TrainPolicy(train::TrainPolicyArgs),
    /// Render a metrics table (and optionally plots) from a simulate run.
    Report(report::ReportArgs),
}

impl Cli {
    /// Load the config and fold in the global overrides.
    pub fn effective_config(&self) -> CliResult<AppConfig> {
        let mut config = match &self.config {
            Some(path) => AppConfig::load(path)?,
            None => AppConfig::default(),
        };
        if let Some(seed) = self.seed {
            config.master_seed = seed;
        }
        if let Some(out) = &self.out {
            config.output_dir = Some(out.clone());
        }
        Ok(config)
    }
}

pub fn run(cli: &Cli) -> CliResult<()> {
    let config = cli.effective_config()?;
    match &cli.command {
        Command::Simulate(args) => simulate::cmd_simulate(&config, args, cli.quiet),
        Command::Route(args) => route::cmd_route(&config, args),
        Command::TrainPolicy(args) => train::cmd_train_policy(&config, args, cli.quiet),
        Command::Report(args) => report::cmd_report(&config, args),
    }
}
