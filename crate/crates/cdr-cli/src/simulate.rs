//! The end-to-end simulation: corpora, policies, benchmark, artifacts.

use std::path::Path;

use cdr_core::benchmark::{
    compare_all, generate_corpus, train_policies, BaselineContext, BenchmarkComparison,
    ComparisonRow,
};
use cdr_core::engines::{SimulatedQuery, TaskCategory};
use clap::Args;
use serde::{Deserialize, Serialize};

use crate::config::AppConfig;
use crate::error::{write_artifact, CliError, CliResult};
use crate::report;

#[derive(Debug, Args)]
pub struct SimulateArgs {}

/// One line of `metrics.csv`; column order is the field order here.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsRow {
    pub baseline: String,
    pub accuracy: f64,
    pub consistency: f64,
    pub mean_tokens: f64,
    pub mean_latency_s: f64,
    pub ece: f64,
    pub fast_fraction: f64,
    pub routing_accuracy: f64,
    pub false_positive_rate: f64,
    pub false_negative_rate: f64,
    pub final_tau: Option<f64>,
    pub token_savings_vs_slow: f64,
    pub acc_delta_vs_fast: f64,
    pub acc_delta_vs_fast_lo: f64,
    pub acc_delta_vs_fast_hi: f64,
    pub acc_delta_vs_slow: f64,
    pub acc_delta_vs_slow_lo: f64,
    pub acc_delta_vs_slow_hi: f64,
}

impl MetricsRow {
    pub fn from_comparison(row: &ComparisonRow) -> MetricsRow {
        MetricsRow {
            baseline: row.baseline.name().to_string(),
            accuracy: row.metrics.accuracy,
            consistency: row.metrics.consistency,
            mean_tokens: row.metrics.mean_tokens,
            mean_latency_s: row.metrics.mean_latency_s,
            ece: row.metrics.ece,
            fast_fraction: row.metrics.fast_fraction,
            routing_accuracy: row.confusion.routing_accuracy,
            false_positive_rate: row.confusion.false_positive_rate,
            false_negative_rate: row.confusion.false_negative_rate,
            final_tau: row.final_tau,
            token_savings_vs_slow: row.token_savings_vs_slow,
            acc_delta_vs_fast: row.accuracy_delta_vs_fast.mean,
            acc_delta_vs_fast_lo: row.accuracy_delta_vs_fast.lo,
            acc_delta_vs_fast_hi: row.accuracy_delta_vs_fast.hi,
            acc_delta_vs_slow: row.accuracy_delta_vs_slow.mean,
            acc_delta_vs_slow_lo: row.accuracy_delta_vs_slow.lo,
            acc_delta_vs_slow_hi: row.accuracy_delta_vs_slow.hi,
        }
    }
}

/// One line of `confusion.csv`: the overall row per baseline plus one row per
/// task category with any traffic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfusionRow {
    pub baseline: String,
    pub category: String,
    pub count: u64,
    pub routing_accuracy: f64,
    pub false_positive_rate: f64,
    pub false_negative_rate: f64,
}

pub fn metrics_csv(comparison: &BenchmarkComparison) -> CliResult<String> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    for row in &comparison.rows {
        writer
            .serialize(MetricsRow::from_comparison(row))
            .map_err(|e| CliError::data(format!("encoding metrics row: {e}")))?;
    }
    let bytes =
        writer.into_inner().map_err(|e| CliError::data(format!("finishing metrics table: {e}")))?;
    String::from_utf8(bytes).map_err(|e| CliError::data(format!("metrics table encoding: {e}")))
}

pub fn confusion_csv(comparison: &BenchmarkComparison) -> CliResult<String> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    for row in &comparison.rows {
        let overall = ConfusionRow {
            baseline: row.baseline.name().to_string(),
            category: "overall".to_string(),
            count: row.confusion.count,
            routing_accuracy: row.confusion.routing_accuracy,
            false_positive_rate: row.confusion.false_positive_rate,
            false_negative_rate: row.confusion.false_negative_rate,
        };
        writer
            .serialize(overall)
            .map_err(|e| CliError::data(format!("encoding confusion row: {e}")))?;
        for category in TaskCategory::ALL {
            if let Some(cell) = row.confusion.per_category.get(&category) {
                writer
                    .serialize(ConfusionRow {
                        baseline: row.baseline.name().to_string(),
                        category: category.name().to_string(),
                        count: cell.count,
                        routing_accuracy: cell.routing_accuracy,
                        false_positive_rate: cell.false_positive_rate,
                        false_negative_rate: cell.false_negative_rate,
                    })
                    .map_err(|e| CliError::data(format!("encoding confusion row: {e}")))?;
            }
        }
    }
    let bytes = writer
        .into_inner()
        .map_err(|e| CliError::data(format!("finishing confusion table: {e}")))?;
    String::from_utf8(bytes).map_err(|e| CliError::data(format!("confusion table encoding: {e}")))
}

pub fn corpus_jsonl(corpus: &[SimulatedQuery]) -> CliResult<String> {
    let mut text = String::new();
    for query in corpus {
        let line = serde_json::to_string(query)
            .map_err(|e| CliError::data(format!("encoding query {}: {e}", query.record.id)))?;
        text.push_str(&line);
        text.push('\n');
    }
    Ok(text)
}

pub fn cmd_simulate(config: &AppConfig, _args: &SimulateArgs, quiet: bool) -> CliResult<()> {
    config.validate()?;
    let out_dir = config.resolved_output_dir();

    log::info!("generating corpora (n = {} per split)", config.corpus.n_queries);
    let train_spec = config.corpus.to_spec(config.train_corpus_seed());
    let eval_spec = config.corpus.to_spec(config.eval_corpus_seed());
    let train_corpus = generate_corpus(&train_spec, &config.engines, &config.utility)
        .map_err(CliError::from_data)?;
    let eval_corpus = generate_corpus(&eval_spec, &config.engines, &config.utility)
        .map_err(CliError::from_data)?;

    log::info!("training routing policies");
    let training = config.policy.to_training_config(config.master_seed);
    let policies = train_policies(&train_corpus, &config.clustering, &training)
        .map_err(CliError::from_data)?;

    log::info!(
        "benchmarking {} baselines x {} repeats",
        cdr_core::benchmark::BaselineId::ALL.len(),
        config.benchmark.repeats
    );
    let ctx = BaselineContext {
        profiles: &config.engines,
        utility: &config.utility,
        clustering: &config.clustering,
        policies: &policies,
        threshold: config.threshold.to_config(),
        epsilon_exploration: config.threshold.epsilon_exploration,
        confidence_threshold: config.benchmark.confidence_threshold,
    };
    let comparison = compare_all(
        &eval_corpus,
        &ctx,
        config.benchmark.repeats,
        config.master_seed,
        config.benchmark.bootstrap_resamples,
    )
    .map_err(CliError::from_data)?;

    let metrics = metrics_csv(&comparison)?;
    write_artifact(&out_dir, "corpus.jsonl", &corpus_jsonl(&eval_corpus)?)?;
    write_artifact(&out_dir, "metrics.csv", &metrics)?;
    write_artifact(&out_dir, "confusion.csv", &confusion_csv(&comparison)?)?;
    write_artifact(&out_dir, "manifest.toml", &config.manifest_toml())?;

    let policy_dir = out_dir.join("policies");
    write_policy(&policy_dir, "linear.json", &cdr_core::RoutingPolicy::Linear(policies.linear))?;
    write_policy(&policy_dir, "neural.json", &cdr_core::RoutingPolicy::Neural(policies.neural))?;
    write_policy(&policy_dir, "tree.json", &cdr_core::RoutingPolicy::Tree(policies.tree))?;

    if !quiet {
        print!("{}", report::render_metrics_table(&metrics)?);
        println!();
        println!("artifacts written to {}", out_dir.display());
    }
    Ok(())
}

fn write_policy(dir: &Path, name: &str, policy: &cdr_core::RoutingPolicy) -> CliResult<()> {
    write_artifact(dir, name, &cdr_core::policy_to_json(policy))
}
