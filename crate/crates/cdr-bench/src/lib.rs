//! Shared fixtures for the benchmark suite.

use cdr_core::{
    generate_corpus, CorpusSpec, EngineProfiles, SimulatedQuery, TrainedPolicies,
    PolicyTrainingConfig, UtilityConfig,
};

/// Deterministic corpus for micro-benchmarks.
pub fn corpus(n: usize, seed: u64) -> Vec<SimulatedQuery> {
    let spec = CorpusSpec { n_queries: n, seed, ..CorpusSpec::default() };
    generate_corpus(&spec, &EngineProfiles::default(), &UtilityConfig::default())
        .expect("fixture corpus generates")
}

/// Policies fitted with a shortened schedule; benches measure scoring, not
/// training quality.
pub fn quick_policies(corpus: &[SimulatedQuery]) -> TrainedPolicies {
    let mut config = PolicyTrainingConfig::default();
    config.train.epochs = 40;
    cdr_core::train_policies(corpus, &cdr_core::ClusteringConfig::default(), &config)
        .expect("fixture policies fit")
}
