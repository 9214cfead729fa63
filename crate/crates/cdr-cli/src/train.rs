//! Fitting a single routing policy from a labeled corpus file.

use std::path::PathBuf;

use cdr_core::engines::SimulatedQuery;
use cdr_core::features::{extract_features, FeatureVector};
use cdr_core::routing::{
    fit_linear, fit_neural, fit_tree, policy_to_json, RoutingPolicy, Strategy,
};
use clap::{Args, ValueEnum};

use crate::config::AppConfig;
use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PolicyKind {
    Linear,
    Neural,
    Tree,
}

#[derive(Debug, Args)]
pub struct TrainPolicyArgs {
    /// Labeled corpus: one JSON object per line, as written by `simulate`.
    #[arg(long, value_name = "FILE")]
    pub corpus: PathBuf,

    /// Scoring family to fit.
    #[arg(long, value_enum)]
    pub kind: PolicyKind,

    /// Where to write the fitted policy (JSON).
    #[arg(long, value_name = "FILE", default_value = "policy.json")]
    pub output: PathBuf,
}

pub fn cmd_train_policy(config: &AppConfig, args: &TrainPolicyArgs, quiet: bool) -> CliResult<()> {
    config.validate()?;

    let text = std::fs::read_to_string(&args.corpus)
        .map_err(|e| CliError::io(format!("reading {}: {e}", args.corpus.display())))?;

    let mut data: Vec<(FeatureVector, Strategy)> = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let query: SimulatedQuery = serde_json::from_str(line).map_err(|e| {
            CliError::data(format!("{} line {}: {e}", args.corpus.display(), idx + 1))
        })?;
        let features = extract_features(&query.record, None, &config.clustering).map_err(|e| {
            CliError::data(format!("{} line {}: {e}", args.corpus.display(), idx + 1))
        })?;
        data.push((features, query.oracle_label));
    }

    let training = config.policy.to_training_config(config.master_seed);
    let policy = match args.kind {
        PolicyKind::Linear => {
            RoutingPolicy::Linear(fit_linear(&data, &training.train).map_err(CliError::from_data)?)
        }
        PolicyKind::Neural => RoutingPolicy::Neural(
            fit_neural(&data, &training.hidden_sizes, &training.train)
                .map_err(CliError::from_data)?,
        ),
        PolicyKind::Tree => RoutingPolicy::Tree(
            fit_tree(&data, training.tree_depth).map_err(CliError::from_data)?,
        ),
    };

    if let Some(parent) = args.output.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent)
            .map_err(|e| CliError::io(format!("creating {}: {e}", parent.display())))?;
    }
    std::fs::write(&args.output, policy_to_json(&policy))
        .map_err(|e| CliError::io(format!("writing {}: {e}", args.output.display())))?;

    if !quiet {
        // Resubstitution accuracy at the default decision boundary: a quick
        // sanity signal, not an evaluation (see `simulate` for held-out runs).
        let hits = data
            .iter()
            .filter(|(f, oracle)| {
                let predicted =
                    if policy.score(f) < 0.5 { Strategy::Fast } else { Strategy::Slow };
                predicted == *oracle
            })
            .count();
        println!("training accuracy: {:.3} ({hits}/{})", hits as f64 / data.len() as f64, data.len());
        println!("policy written to {}", args.output.display());
    }
    Ok(())
}
