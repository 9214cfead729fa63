//! Complexity-aware routing between a fast single-pass reasoning strategy
//! and a slow deliberate one.
//!
//! The pipeline: [`features`] turns a query into a four-dimensional
//! complexity description (correlation strength, domain crossing,
//! stakeholder multiplicity, uncertainty), [`routing`] scores it with a
//! learned policy and compares against an adaptive threshold, [`engines`]
//! simulates the two strategies' accuracy/cost trade-off, and [`benchmark`]
//! evaluates routing policies against reference baselines on generated
//! corpora. [`numeric`] holds the shared estimators (mutual information,
//! small MLPs) and [`rng`] the counter-based deterministic random streams
//! everything draws from.
//!
//! Determinism is load-bearing: every random decision is keyed by a seed and
//! a structural path (query index, repeat, strategy, purpose), never by
//! evaluation order, so identical inputs produce byte-identical outputs and
//! paired comparisons between baselines are exact.

pub mod benchmark;
pub mod engines;
pub mod error;
pub mod features;
pub mod numeric;
pub mod rng;
pub mod routing;

pub use benchmark::{
    compare_all, generate_corpus, run_baseline, train_policies, BaselineContext, BaselineId,
    BaselineRun, BenchmarkComparison, CategoryMix, ComparisonRow, CorpusSpec,
    PolicyTrainingConfig, TrainedPolicies,
};
pub use engines::{
    respond, strategy_utility, EngineProfile, EngineProfiles, EngineResponse, SimulatedQuery,
    TaskCategory, UtilityConfig,
};
pub use error::{Error, Result};
pub use features::{
    extract_features, ClusteringConfig, CorrelationInput, CorrelationModel, FeatureVector,
    QueryRecord,
};
pub use numeric::{mi_critic, mi_exact, mi_histogram, CriticConfig, MlpParams, TrainConfig};
pub use routing::{
    policy_from_json, policy_to_json, route, RoutingDecision, RoutingPolicy, Strategy,
    ThresholdConfig, ThresholdState,
};
