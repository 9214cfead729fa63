//! Benchmark harness: baselines, paired evaluation, and aggregate reports.
//!
//! Every strategy under test answers the same queries through the same
//! engines. Engine draws are keyed by `(query, repeat, strategy)` — not by
//! baseline — so two baselines that route a query the same way get the
//! identical response, and any metric difference between them is routing,
//! not sampling luck. The same keying makes per-query accuracies pairable
//! across baselines for bootstrap confidence intervals.

pub mod corpus;
pub mod metrics;

pub use corpus::{category_complexity_range, generate_corpus, CategoryMix, CorpusSpec};
pub use metrics::{
    calibration_ece, consistency, paired_bootstrap_ci, routing_confusion, BootstrapCi,
    ConfusionReport, RunMetrics,
};

use crate::engines::{respond, EngineProfiles, SimulatedQuery, UtilityConfig};
use crate::error::{Error, Result};
use crate::features::{extract_features, ClusteringConfig, FeatureVector};
use crate::numeric::TrainConfig;
use crate::routing::{
    fit_linear, fit_neural, fit_tree, route, LinearPolicy, NeuralPolicy, OutcomeRecord,
    RoutingPolicy, Strategy, ThresholdConfig, ThresholdState, TreePolicy,
};
use crate::rng::{label, StreamKey};
use metrics::KahanSum;
use serde::{Deserialize, Serialize};

/// Number of equal-width bins used for calibration error in reports.
pub const DEFAULT_ECE_BINS: usize = 10;

/// Routing strategies compared by the harness.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BaselineId {
    /// Every query through the fast engine.
    UniformFast,
    /// Every query through the slow engine.
    UniformSlow,
    /// Fair-coin routing.
    Random,
    /// Probes the fast engine and escalates to slow when the probe's
    /// confidence is low. Billed like every router: the engine that produces
    /// the answer pays; the probe is a routing signal only, which keeps the
    /// mixture identity `mean_tokens = ff·E[fast] + (1-ff)·E[slow]` exact
    /// across all baselines.
    ConfidenceBased,
    /// Slow whenever the query has strictly more concepts than the corpus
    /// median.
    LengthBased,
    /// Learned routing with a linear scorer and adaptive threshold.
    CdrLinear,
    /// Learned routing with a small neural scorer and adaptive threshold.
    CdrNeural,
    /// Learned routing with a decision-tree scorer and adaptive threshold.
    CdrTree,
}

impl BaselineId {
    /// Report order. The first two rows are the reference points the
    /// comparative columns are computed against.
    pub const ALL: [BaselineId; 8] = [
        BaselineId::UniformFast,
        BaselineId::UniformSlow,
        BaselineId::Random,
        BaselineId::ConfidenceBased,
        BaselineId::LengthBased,
        BaselineId::CdrLinear,
        BaselineId::CdrNeural,
        BaselineId::CdrTree,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            BaselineId::UniformFast => "uniform_fast",
            BaselineId::UniformSlow => "uniform_slow",
            BaselineId::Random => "random",
            BaselineId::ConfidenceBased => "confidence_based",
            BaselineId::LengthBased => "length_based",
            BaselineId::CdrLinear => "cdr_linear",
            BaselineId::CdrNeural => "cdr_neural",
            BaselineId::CdrTree => "cdr_tree",
        }
    }

    /// True for the baselines that score features and adapt a threshold.
    pub fn is_adaptive(&self) -> bool {
        matches!(
            self,
            BaselineId::CdrLinear | BaselineId::CdrNeural | BaselineId::CdrTree
        )
    }
}

impl std::fmt::Display for BaselineId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// One policy per scoring family, trained on the same data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedPolicies {
    pub linear: LinearPolicy,
    pub neural: NeuralPolicy,
    pub tree: TreePolicy,
}

impl TrainedPolicies {
    pub fn policy(&self, baseline: BaselineId) -> Option<RoutingPolicy> {
        match baseline {
            BaselineId::CdrLinear => Some(RoutingPolicy::Linear(self.linear.clone())),
            BaselineId::CdrNeural => Some(RoutingPolicy::Neural(self.neural.clone())),
            BaselineId::CdrTree => Some(RoutingPolicy::Tree(self.tree.clone())),
            _ => None,
        }
    }
}

/// Hyperparameters for fitting the three policy families.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PolicyTrainingConfig {
    pub hidden_sizes: Vec<usize>,
    pub train: TrainConfig,
    pub tree_depth: usize,
}

impl Default for PolicyTrainingConfig {
    fn default() -> Self {
        PolicyTrainingConfig {
            hidden_sizes: vec![16, 8],
            train: TrainConfig {
                learning_rate: 0.25,
                epochs: 200,
                batch_size: 64,
                seed: 7,
                init_scale: 0.3,
            },
            tree_depth: 4,
        }
    }
}

impl PolicyTrainingConfig {
    pub fn validate(&self) -> Result<()> {
        if self.hidden_sizes.is_empty() || self.hidden_sizes.iter().any(|&h| h == 0) {
            return Err(Error::invalid("hidden_sizes must be non-empty and positive"));
        }
        if self.tree_depth == 0 {
            return Err(Error::invalid("tree_depth must be at least 1"));
        }
        self.train.validate()
    }
}

/// Fit all three policy families against a corpus's oracle labels.
pub fn train_policies(
    corpus: &[SimulatedQuery],
    clustering: &ClusteringConfig,
    config: &PolicyTrainingConfig,
) -> Result<TrainedPolicies> {
    config.validate()?;
    let data: Vec<(FeatureVector, Strategy)> = corpus
        .iter()
        .map(|q| Ok((extract_features(&q.record, None, clustering)?, q.oracle_label)))
        .collect::<Result<_>>()?;
    Ok(TrainedPolicies {
        linear: fit_linear(&data, &config.train)?,
        neural: fit_neural(&data, &config.hidden_sizes, &config.train)?,
        tree: fit_tree(&data, config.tree_depth)?,
    })
}

/// Everything a baseline run needs besides the corpus itself.
#[derive(Debug, Clone)]
pub struct BaselineContext<'a> {
    pub profiles: &'a EngineProfiles,
    pub utility: &'a UtilityConfig,
    pub clustering: &'a ClusteringConfig,
    pub policies: &'a TrainedPolicies,
    pub threshold: ThresholdConfig,
    /// Probability that an adaptive baseline also shadow-runs the strategy
    /// it did not choose, feeding the threshold counterfactual evidence.
    /// Shadow runs are measurement-only: their cost and answers stay out of
    /// every reported metric.
    pub epsilon_exploration: f64,
    /// Fast-engine confidence below which [`BaselineId::ConfidenceBased`]
    /// escalates.
    pub confidence_threshold: f64,
}

impl BaselineContext<'_> {
    pub fn validate(&self) -> Result<()> {
        self.profiles.validate()?;
        self.utility.validate()?;
        self.clustering.validate()?;
        self.threshold.validate()?;
        if !(self.epsilon_exploration.is_finite()
            && (0.0..=1.0).contains(&self.epsilon_exploration))
        {
            return Err(Error::invalid("epsilon_exploration must lie in [0, 1]"));
        }
        if !(self.confidence_threshold.is_finite()
            && (0.0..=1.0).contains(&self.confidence_threshold))
        {
            return Err(Error::invalid("confidence_threshold must lie in [0, 1]"));
        }
        Ok(())
    }
}

/// Result of evaluating one baseline over the corpus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineRun {
    pub baseline: BaselineId,
    pub metrics: RunMetrics,
    pub confusion: ConfusionReport,
    /// Fraction of repeats answered correctly, per query, in corpus order.
    /// Paired across baselines by construction.
    pub per_query_accuracy: Vec<f64>,
    /// Final adapted threshold of the last repeat; `None` for baselines
    /// without one.
    pub final_tau: Option<f64>,
}

struct EngineDraws<'a> {
    profiles: &'a EngineProfiles,
    engine_key: StreamKey,
    answer_key: StreamKey,
}

impl EngineDraws<'_> {
    fn respond(&self, i: usize, repeat: usize, strategy: Strategy, query: &SimulatedQuery) -> crate::engines::EngineResponse {
        let mut stream = self
            .engine_key
            .child(i as u64)
            .child(repeat as u64)
            .child(strategy as u64)
            .stream();
        respond(self.profiles.get(strategy), query, &mut stream)
    }

    /// Stable answer identity for consistency measurement: correct runs all
    /// agree on answer 0; a wrong run picks one of the remaining candidate
    /// answers, deterministically per `(query, repeat, strategy)`.
    fn answer_id(&self, i: usize, repeat: usize, strategy: Strategy, correct: bool, query: &SimulatedQuery) -> u32 {
        if correct {
            return 0;
        }
        let wrong_options = (query.record.candidate_probs.len().max(2) - 1) as u64;
        let mut stream = self
            .answer_key
            .child(i as u64)
            .child(repeat as u64)
            .child(strategy as u64)
            .stream();
        1 + stream.below(wrong_options) as u32
    }
}

/// Evaluate one baseline: `repeats` passes over the corpus, identical engine
/// randomness across baselines, metrics aggregated over every pass.
pub fn run_baseline(
    corpus: &[SimulatedQuery],
    baseline: BaselineId,
    ctx: &BaselineContext,
    repeats: usize,
    seed: u64,
) -> Result<BaselineRun> {
    ctx.validate()?;
    if corpus.is_empty() {
        return Err(Error::invalid("corpus must be non-empty"));
    }
    if repeats < 2 {
        return Err(Error::invalid(
            "repeats must be at least 2 so answer consistency is defined",
        ));
    }
    let n = corpus.len();

    let features: Vec<FeatureVector> = corpus
        .iter()
        .map(|q| extract_features(&q.record, None, ctx.clustering))
        .collect::<Result<_>>()?;
    let policy = ctx.policies.policy(baseline);

    // Median concept count, averaging the middle pair for even n.
    let median_concepts = {
        let mut counts: Vec<usize> = corpus
            .iter()
            .map(|q| q.record.concept_embeddings.len())
            .collect();
        counts.sort_unstable();
        if n % 2 == 1 {
            counts[n / 2] as f64
        } else {
            (counts[n / 2 - 1] + counts[n / 2]) as f64 / 2.0
        }
    };

    let root = StreamKey::root(seed);
    let draws = EngineDraws {
        profiles: ctx.profiles,
        engine_key: root.child(label::ENGINE),
        answer_key: root.child(label::ANSWER),
    };

    let mut answers: Vec<Vec<u32>> = vec![Vec::with_capacity(repeats); n];
    let mut per_query_hits = vec![0u32; n];
    let mut confidences = Vec::with_capacity(n * repeats);
    let mut corrects = Vec::with_capacity(n * repeats);
    let mut decided = Vec::with_capacity(n * repeats);
    let mut oracle = Vec::with_capacity(n * repeats);
    let mut categories = Vec::with_capacity(n * repeats);
    let mut token_sum = KahanSum::default();
    let mut latency_sum = KahanSum::default();
    let mut hits = 0u64;
    let mut fast_only = 0u64;
    let mut final_tau = None;

    for repeat in 0..repeats {
        let mut state = if baseline.is_adaptive() {
            Some(ThresholdState::new(ctx.threshold.clone())?)
        } else {
            None
        };
        let mut coin = root.child(label::RANDOM_ROUTE).child(repeat as u64).stream();
        let mut explore = root.child(label::EXPLORE).child(repeat as u64).stream();

        for (i, query) in corpus.iter().enumerate() {
            // (chosen strategy, response backing the answer, tokens billed,
            // latency billed, whether the query never left the fast engine)
            let (strategy, response, tokens, latency, stayed_fast);
            match baseline {
                BaselineId::UniformFast | BaselineId::UniformSlow => {
                    strategy = if baseline == BaselineId::UniformFast {
                        Strategy::Fast
                    } else {
                        Strategy::Slow
                    };
                    response = draws.respond(i, repeat, strategy, query);
                    tokens = response.tokens as f64;
                    latency = response.latency_s;
                    stayed_fast = strategy == Strategy::Fast;
                }
                BaselineId::Random => {
                    strategy = if coin.next_f64() < 0.5 {
                        Strategy::Fast
                    } else {
                        Strategy::Slow
                    };
                    response = draws.respond(i, repeat, strategy, query);
                    tokens = response.tokens as f64;
                    latency = response.latency_s;
                    stayed_fast = strategy == Strategy::Fast;
                }
                BaselineId::ConfidenceBased => {
                    let probe = draws.respond(i, repeat, Strategy::Fast, query);
                    if probe.confidence < ctx.confidence_threshold {
                        strategy = Strategy::Slow;
                        response = draws.respond(i, repeat, Strategy::Slow, query);
                        stayed_fast = false;
                    } else {
                        strategy = Strategy::Fast;
                        response = probe;
                        stayed_fast = true;
                    }
                    tokens = response.tokens as f64;
                    latency = response.latency_s;
                }
                BaselineId::LengthBased => {
                    strategy = if (query.record.concept_embeddings.len() as f64) > median_concepts
                    {
                        Strategy::Slow
                    } else {
                        Strategy::Fast
                    };
                    response = draws.respond(i, repeat, strategy, query);
                    tokens = response.tokens as f64;
                    latency = response.latency_s;
                    stayed_fast = strategy == Strategy::Fast;
                }
                BaselineId::CdrLinear | BaselineId::CdrNeural | BaselineId::CdrTree => {
                    let policy = policy.as_ref().expect("adaptive baseline has a policy");
                    let state = state.as_mut().expect("adaptive baseline has a threshold");
                    let score = policy.score(&features[i]);
                    let decision = route(score, state, features[i]);
                    strategy = decision.strategy;
                    response = draws.respond(i, repeat, strategy, query);
                    tokens = response.tokens as f64;
                    latency = response.latency_s;
                    stayed_fast = strategy == Strategy::Fast;

                    // Shadow-run the road not taken so threshold updates can
                    // weigh both engines; excluded from all reported costs.
                    let counterfactual_correct = if explore.next_f64() < ctx.epsilon_exploration {
                        Some(draws.respond(i, repeat, strategy.other(), query).correct)
                    } else {
                        None
                    };
                    state.record_outcome(OutcomeRecord {
                        strategy,
                        correct: response.correct,
                        counterfactual_correct,
                    });
                    match state.update_threshold() {
                        Ok(_) | Err(Error::InsufficientEvidence(_)) => {}
                        Err(e) => return Err(e),
                    }
                }
            }

            answers[i].push(draws.answer_id(i, repeat, strategy, response.correct, query));
            per_query_hits[i] += u32::from(response.correct);
            hits += u64::from(response.correct);
            fast_only += u64::from(stayed_fast);
            token_sum.add(tokens);
            latency_sum.add(latency);
            confidences.push(response.confidence);
            corrects.push(response.correct);
            decided.push(strategy);
            oracle.push(query.oracle_label);
            categories.push(query.category);
        }

        if let Some(state) = &state {
            final_tau = Some(state.tau());
        }
    }

    let total = (n * repeats) as f64;
    let metrics = RunMetrics {
        accuracy: hits as f64 / total,
        consistency: consistency(&answers)?,
        mean_tokens: token_sum.value() / total,
        mean_latency_s: latency_sum.value() / total,
        ece: calibration_ece(&confidences, &corrects, DEFAULT_ECE_BINS)?,
        fast_fraction: fast_only as f64 / total,
    };
    let confusion = routing_confusion(&decided, &oracle, Some(&categories))?;
    let per_query_accuracy = per_query_hits
        .into_iter()
        .map(|h| h as f64 / repeats as f64)
        .collect();

    Ok(BaselineRun {
        baseline,
        metrics,
        confusion,
        per_query_accuracy,
        final_tau,
    })
}

/// One row of the final comparison table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub baseline: BaselineId,
    pub metrics: RunMetrics,
    pub confusion: ConfusionReport,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub final_tau: Option<f64>,
    /// `1 - mean_tokens / uniform_slow_mean_tokens`: positive when cheaper
    /// than always thinking slowly.
    pub token_savings_vs_slow: f64,
    /// Paired bootstrap CI on mean per-query accuracy minus uniform-fast.
    pub accuracy_delta_vs_fast: BootstrapCi,
    /// Paired bootstrap CI on mean per-query accuracy minus uniform-slow.
    pub accuracy_delta_vs_slow: BootstrapCi,
}

/// Comparison of every baseline over one corpus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkComparison {
    pub rows: Vec<ComparisonRow>,
}

impl BenchmarkComparison {
    pub fn row(&self, baseline: BaselineId) -> &ComparisonRow {
        self.rows
            .iter()
            .find(|r| r.baseline == baseline)
            .expect("comparison always holds every baseline")
    }
}

/// Evaluate every baseline and assemble the comparison table. Rows appear in
/// [`BaselineId::ALL`] order.
pub fn compare_all(
    corpus: &[SimulatedQuery],
    ctx: &BaselineContext,
    repeats: usize,
    seed: u64,
    bootstrap_resamples: usize,
) -> Result<BenchmarkComparison> {
    let runs: Vec<BaselineRun> = BaselineId::ALL
        .iter()
        .map(|b| run_baseline(corpus, *b, ctx, repeats, seed))
        .collect::<Result<_>>()?;
    let fast_acc = runs[0].per_query_accuracy.clone();
    let slow_acc = runs[1].per_query_accuracy.clone();
    let slow_tokens = runs[1].metrics.mean_tokens;

    let ci_root = StreamKey::root(seed).child(label::BOOTSTRAP);
    let rows = runs
        .into_iter()
        .enumerate()
        .map(|(idx, run)| {
            let key = ci_root.child(idx as u64);
            Ok(ComparisonRow {
                token_savings_vs_slow: 1.0 - run.metrics.mean_tokens / slow_tokens,
                accuracy_delta_vs_fast: paired_bootstrap_ci(
                    &run.per_query_accuracy,
                    &fast_acc,
                    bootstrap_resamples,
                    key.child(0),
                )?,
                accuracy_delta_vs_slow: paired_bootstrap_ci(
                    &run.per_query_accuracy,
                    &slow_acc,
                    bootstrap_resamples,
                    key.child(1),
                )?,
                baseline: run.baseline,
                metrics: run.metrics,
                confusion: run.confusion,
                final_tau: run.final_tau,
            })
        })
        .collect::<Result<_>>()?;
    Ok(BenchmarkComparison { rows })
}
