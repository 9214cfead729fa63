//! Application configuration.
//!
//! One TOML file drives everything; every section has defaults, unknown keys
//! are rejected, and the only seed anywhere is `master_seed` — corpus
//! generation, policy training, and benchmark execution all derive their
//! streams from it, so a config file fully determines a run.

use std::path::{Path, PathBuf};

use cdr_core::engines::{EngineProfiles, UtilityConfig};
use cdr_core::features::ClusteringConfig;
use cdr_core::numeric::TrainConfig;
use cdr_core::benchmark::{CategoryMix, CorpusSpec, PolicyTrainingConfig};
use cdr_core::rng::{label, StreamKey};
use cdr_core::routing::ThresholdConfig;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

/// Output directory used when neither the config nor `--out` names one.
pub const DEFAULT_OUTPUT_DIR: &str = "cdr-run";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AppConfig {
    pub master_seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    pub corpus: CorpusSettings,
    pub engines: EngineProfiles,
    pub utility: UtilityConfig,
    pub clustering: ClusteringConfig,
    pub policy: PolicySettings,
    pub threshold: ThresholdSettings,
    pub benchmark: BenchmarkSettings,
}

impl Default for AppConfig {
    fn default() -> Self {
        AppConfig {
            master_seed: 42,
            output_dir: None,
            corpus: CorpusSettings::default(),
            engines: EngineProfiles::default(),
            utility: UtilityConfig::default(),
            clustering: ClusteringConfig::default(),
            policy: PolicySettings::default(),
            threshold: ThresholdSettings::default(),
            benchmark: BenchmarkSettings::default(),
        }
    }
}

/// Corpus size and shape; the generation seed comes from the master seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CorpusSettings {
    pub n_queries: usize,
    pub category_mix: CategoryMix,
    pub feature_noise: f64,
}

impl Default for CorpusSettings {
    fn default() -> Self {
        let spec = CorpusSpec::default();
        CorpusSettings {
            n_queries: spec.n_queries,
            category_mix: spec.category_mix,
            feature_noise: spec.feature_noise,
        }
    }
}

impl CorpusSettings {
    pub fn to_spec(&self, seed: u64) -> CorpusSpec {
        CorpusSpec {
            n_queries: self.n_queries,
            seed,
            category_mix: self.category_mix.clone(),
            feature_noise: self.feature_noise,
        }
    }
}

/// Policy-fitting hyperparameters; the training seed comes from the master
/// seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PolicySettings {
    pub hidden_sizes: Vec<usize>,
    pub tree_depth: usize,
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub init_scale: f64,
}

impl Default for PolicySettings {
    fn default() -> Self {
        let config = PolicyTrainingConfig::default();
        PolicySettings {
            hidden_sizes: config.hidden_sizes,
            tree_depth: config.tree_depth,
            learning_rate: config.train.learning_rate,
            epochs: config.train.epochs,
            batch_size: config.train.batch_size,
            init_scale: config.train.init_scale,
        }
    }
}

impl PolicySettings {
    pub fn to_training_config(&self, master_seed: u64) -> PolicyTrainingConfig {
        PolicyTrainingConfig {
            hidden_sizes: self.hidden_sizes.clone(),
            tree_depth: self.tree_depth,
            train: TrainConfig {
                learning_rate: self.learning_rate,
                epochs: self.epochs,
                batch_size: self.batch_size,
                seed: StreamKey::root(master_seed).child(label::POLICY).as_seed(),
                init_scale: self.init_scale,
            },
        }
    }
}

/// Adaptive-threshold settings plus the exploration rate that feeds it
/// counterfactual evidence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ThresholdSettings {
    pub initial_tau: f64,
    pub alpha: f64,
    pub window: usize,
    pub tau_min: f64,
    pub tau_max: f64,
    pub epsilon_exploration: f64,
}

impl Default for ThresholdSettings {
    fn default() -> Self {
        let config = ThresholdConfig::default();
        ThresholdSettings {
            initial_tau: config.initial_tau,
            alpha: config.alpha,
            window: config.window,
            tau_min: config.tau_min,
            tau_max: config.tau_max,
            epsilon_exploration: 0.1,
        }
    }
}

impl ThresholdSettings {
    pub fn to_config(&self) -> ThresholdConfig {
        ThresholdConfig {
            initial_tau: self.initial_tau,
            alpha: self.alpha,
            window: self.window,
            tau_min: self.tau_min,
            tau_max: self.tau_max,
        }
    }
}

/// Evaluation protocol knobs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BenchmarkSettings {
    pub repeats: usize,
    pub bootstrap_resamples: usize,
    pub confidence_threshold: f64,
}

impl Default for BenchmarkSettings {
    fn default() -> Self {
        BenchmarkSettings { repeats: 10, bootstrap_resamples: 10_000, confidence_threshold: 0.7 }
    }
}

impl AppConfig {
    /// Parse a TOML config file. Unknown keys anywhere are an error.
    pub fn load(path: &Path) -> CliResult<AppConfig> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::io(format!("reading config {}: {e}", path.display())))?;
        let config: AppConfig = toml::from_str(&text)
            .map_err(|e| CliError::validation(format!("config {}: {e}", path.display())))?;
        config.validate()?;
        Ok(config)
    }

    /// Cross-check every section against its owning type's rules.
    pub fn validate(&self) -> CliResult<()> {
        // The seed passed here is irrelevant to validity.
        self.corpus.to_spec(0).validate().map_err(CliError::from_validation)?;
        self.engines.validate().map_err(CliError::from_validation)?;
        self.utility.validate().map_err(CliError::from_validation)?;
        self.clustering.validate().map_err(CliError::from_validation)?;
        self.policy.to_training_config(0).validate().map_err(CliError::from_validation)?;
        self.threshold.to_config().validate().map_err(CliError::from_validation)?;
        if !(self.threshold.epsilon_exploration.is_finite()
            && (0.0..=1.0).contains(&self.threshold.epsilon_exploration))
        {
            return Err(CliError::validation("threshold.epsilon_exploration must lie in [0, 1]"));
        }
        if self.benchmark.repeats < 2 {
            return Err(CliError::validation(
                "benchmark.repeats must be at least 2 (consistency needs repeated runs)",
            ));
        }
        if self.benchmark.bootstrap_resamples < 40 {
            return Err(CliError::validation("benchmark.bootstrap_resamples must be at least 40"));
        }
        if !(self.benchmark.confidence_threshold.is_finite()
            && (0.0..=1.0).contains(&self.benchmark.confidence_threshold))
        {
            return Err(CliError::validation("benchmark.confidence_threshold must lie in [0, 1]"));
        }
        Ok(())
    }

    /// Seed for the policy-training corpus.
    pub fn train_corpus_seed(&self) -> u64 {
        StreamKey::root(self.master_seed).child(label::TRAIN_SPLIT).as_seed()
    }

    /// Seed for the held-out evaluation corpus.
    pub fn eval_corpus_seed(&self) -> u64 {
        StreamKey::root(self.master_seed).child(label::EVAL_SPLIT).as_seed()
    }

    pub fn resolved_output_dir(&self) -> PathBuf {
        self.output_dir.clone().unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT_DIR))
    }

    /// The manifest is this config re-serialized without the output
    /// directory, so a run's artifacts are byte-identical no matter where
    /// they land.
    pub fn manifest_toml(&self) -> String {
        let mut manifest = self.clone();
        manifest.output_dir = None;
        toml::to_string_pretty(&manifest).expect("config serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_config_is_valid_and_round_trips() {
        let config = AppConfig::default();
        config.validate().unwrap();
        let text = toml::to_string_pretty(&config).unwrap();
        let back: AppConfig = toml::from_str(&text).unwrap();
        assert_eq!(back, config);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let err = toml::from_str::<AppConfig>("master_sede = 3\n").unwrap_err();
        assert!(err.to_string().contains("master_sede"));
        assert!(toml::from_str::<AppConfig>("[corpus]\nn_queriez = 10\n").is_err());
    }

    #[test]
    fn bad_category_mix_is_named_in_the_error() {
        let config: AppConfig = toml::from_str(
            "[corpus.category_mix]\nfactual = 0.1\n",
        )
        .unwrap();
        let err = config.validate().unwrap_err();
        assert!(err.to_string().contains("category_mix"), "{err}");
    }

    #[test]
    fn manifest_drops_output_dir_only() {
        let mut config = AppConfig::default();
        config.output_dir = Some(PathBuf::from("/tmp/somewhere"));
        let manifest = config.manifest_toml();
        assert!(!manifest.contains("somewhere"));
        let back: AppConfig = toml::from_str(&manifest).unwrap();
        config.output_dir = None;
        assert_eq!(back, config);
    }

    #[test]
    fn derived_seeds_differ_per_purpose() {
        let config = AppConfig::default();
        assert_ne!(config.train_corpus_seed(), config.eval_corpus_seed());
        assert_ne!(config.train_corpus_seed(), config.master_seed);
    }
}
