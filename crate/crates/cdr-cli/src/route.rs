//! Batch routing of a query file at a fixed threshold.
//!
//! No outcomes are observed in this mode, so the threshold never adapts:
//! every decision uses the same tau. Output is one decision object per input
//! line, in input order.

use std::collections::HashSet;
use std::io::Write;
use std::path::PathBuf;

use cdr_core::features::{extract_features, CorrelationModel, FeatureVector, QueryRecord};
use cdr_core::numeric::MlpParams;
use cdr_core::routing::{
    policy_from_json, route, RoutingPolicy, Strategy, ThresholdConfig, ThresholdState,
};
use clap::Args;
use serde::{Deserialize, Serialize};

use crate::config::AppConfig;
use crate::error::{CliError, CliResult};

#[derive(Debug, Args)]
pub struct RouteArgs {
    /// Query file: one JSON object per line.
    #[arg(long, value_name = "FILE")]
    pub queries: PathBuf,

    /// Trained policy file (JSON, versioned).
    #[arg(long, value_name = "FILE")]
    pub policy: PathBuf,

    /// Fixed routing threshold; defaults to the configured initial value.
    #[arg(long, value_name = "REAL")]
    pub tau: Option<f64>,

    /// Where to write decisions; stdout when omitted.
    #[arg(long, value_name = "FILE")]
    pub output: Option<PathBuf>,

    /// Replace each bad line with an error sentinel instead of stopping.
    #[arg(long)]
    pub continue_on_error: bool,

    /// Fitted correlation scorer, required when queries carry embeddings
    /// instead of explicit joints.
    #[arg(long, value_name = "FILE")]
    pub correlation_model: Option<PathBuf>,
}

/// One routing decision, one line of output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionLine {
    pub id: String,
    pub strategy: Strategy,
    pub score: f64,
    pub tau: f64,
    pub features: FeatureVector,
}

/// Written in place of a decision when `--continue-on-error` is set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorSentinel {
    pub line: usize,
    pub error: String,
}

pub fn cmd_route(config: &AppConfig, args: &RouteArgs) -> CliResult<()> {
    config.validate()?;
    let tau = args.tau.unwrap_or(config.threshold.initial_tau);
    if !(config.threshold.tau_min..=config.threshold.tau_max).contains(&tau) {
        return Err(CliError::validation(format!(
            "--tau {tau} outside the configured band [{}, {}]",
            config.threshold.tau_min, config.threshold.tau_max
        )));
    }

    let policy_text = std::fs::read_to_string(&args.policy)
        .map_err(|e| CliError::io(format!("reading {}: {e}", args.policy.display())))?;
    let policy = policy_from_json(&policy_text)
        .map_err(|e| CliError::data(format!("{}: {e}", args.policy.display())))?;

    let model = match &args.correlation_model {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::io(format!("reading {}: {e}", path.display())))?;
            let params: MlpParams = serde_json::from_str(&text)
                .map_err(|e| CliError::data(format!("{}: {e}", path.display())))?;
            Some(
                CorrelationModel::new(params)
                    .map_err(|e| CliError::data(format!("{}: {e}", path.display())))?,
            )
        }
        None => None,
    };

    let query_text = std::fs::read_to_string(&args.queries)
        .map_err(|e| CliError::io(format!("reading {}: {e}", args.queries.display())))?;

    // A frozen threshold state pinned at the requested tau; batch mode never
    // observes outcomes, so it never adapts.
    let state = ThresholdState::new(ThresholdConfig {
        initial_tau: tau,
        ..config.threshold.to_config()
    })
    .map_err(CliError::from_validation)?;

    let mut seen_ids: HashSet<String> = HashSet::new();
    let mut out = String::new();
    for (idx, line) in query_text.lines().enumerate() {
        let line_no = idx + 1;
        match decide(line, &policy, model.as_ref(), &state, config, &mut seen_ids) {
            Ok(decision) => {
                out.push_str(&serde_json::to_string(&decision).expect("decisions serialize"));
                out.push('\n');
            }
            Err(message) if args.continue_on_error => {
                let sentinel = ErrorSentinel { line: line_no, error: message };
                out.push_str(&serde_json::to_string(&sentinel).expect("sentinels serialize"));
                out.push('\n');
            }
            Err(message) => {
                return Err(CliError::data(format!(
                    "{} line {line_no}: {message}",
                    args.queries.display()
                )));
            }
        }
    }

    match &args.output {
        Some(path) => {
            if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
                std::fs::create_dir_all(parent)
                    .map_err(|e| CliError::io(format!("creating {}: {e}", parent.display())))?;
            }
            std::fs::write(path, out)
                .map_err(|e| CliError::io(format!("writing {}: {e}", path.display())))
        }
        None => {
            let stdout = std::io::stdout();
            stdout
                .lock()
                .write_all(out.as_bytes())
                .map_err(|e| CliError::io(format!("writing stdout: {e}")))
        }
    }
}

fn decide(
    line: &str,
    policy: &RoutingPolicy,
    model: Option<&CorrelationModel>,
    state: &ThresholdState,
    config: &AppConfig,
    seen_ids: &mut HashSet<String>,
) -> Result<DecisionLine, String> {
    let record: QueryRecord = serde_json::from_str(line).map_err(|e| e.to_string())?;
    if !seen_ids.insert(record.id.clone()) {
        return Err(format!("duplicate query id {:?}", record.id));
    }
    let features =
        extract_features(&record, model, &config.clustering).map_err(|e| e.to_string())?;
    let decision = route(policy.score(&features), state, features);
    Ok(DecisionLine {
        id: record.id,
        strategy: decision.strategy,
        score: decision.score,
        tau: decision.tau,
        features: decision.features,
    })
}
