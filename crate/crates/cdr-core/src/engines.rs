//! Simulated reasoning engines.
//!
//! Each strategy is modeled by an accuracy-versus-complexity curve plus
//! Gaussian cost distributions for tokens and latency. The fast engine is
//! strong on low-complexity queries and collapses on hard ones; the slow
//! engine costs roughly 2.4x the tokens, starts lower, and degrades gently.
//! Under the default profiles the two utility curves cross near a latent
//! complexity of 0.55.
//!
//! All stochastic behavior flows through a caller-supplied stream, so a
//! response is a pure function of `(profile, query, stream position)`.

use crate::error::{Error, Result};
use crate::features::QueryRecord;
use crate::numeric::PROB_SUM_TOL;
use crate::rng::RngStream;
use crate::routing::Strategy;
use serde::{Deserialize, Serialize};

/// Benchmark task families, ordered by typical complexity.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
#[serde(rename_all = "snake_case")]
pub enum TaskCategory {
    Factual,
    CorrelationPrediction,
    MultiStakeholder,
    CrossDomain,
    ProfessionalJudgment,
}

impl TaskCategory {
    pub const ALL: [TaskCategory; 5] = [
        TaskCategory::Factual,
        TaskCategory::CorrelationPrediction,
        TaskCategory::MultiStakeholder,
        TaskCategory::CrossDomain,
        TaskCategory::ProfessionalJudgment,
    ];

    pub fn name(self) -> &'static str {
        match self {
            TaskCategory::Factual => "factual",
            TaskCategory::CorrelationPrediction => "correlation_prediction",
            TaskCategory::MultiStakeholder => "multi_stakeholder",
            TaskCategory::CrossDomain => "cross_domain",
            TaskCategory::ProfessionalJudgment => "professional_judgment",
        }
    }
}

impl std::fmt::Display for TaskCategory {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Mean and standard deviation of a Gaussian cost draw.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostStats {
    pub mean: f64,
    pub std: f64,
}

impl CostStats {
    pub fn validate(&self) -> Result<()> {
        if !(self.mean.is_finite() && self.mean > 0.0) {
            return Err(Error::invalid(format!("cost mean {} must be positive", self.mean)));
        }
        if !(self.std.is_finite() && self.std >= 0.0) {
            return Err(Error::invalid(format!(
                "cost standard deviation {} must be non-negative",
                self.std
            )));
        }
        Ok(())
    }
}

/// Piecewise-linear accuracy as a function of latent complexity `z`.
///
/// Control points must start at `z = 0`, end at `z = 1`, be strictly
/// increasing in `z`, and carry accuracies in [0, 1]. Evaluation clamps `z`
/// into [0, 1] and interpolates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<(f64, f64)>", into = "Vec<(f64, f64)>")]
pub struct AccuracyCurve {
    points: Vec<(f64, f64)>,
}

impl AccuracyCurve {
    pub fn new(points: Vec<(f64, f64)>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::invalid("accuracy curve needs at least two control points"));
        }
        if points.first().map(|p| p.0) != Some(0.0) || points.last().map(|p| p.0) != Some(1.0) {
            return Err(Error::invalid("accuracy curve must span z = 0 to z = 1"));
        }
        for pair in points.windows(2) {
            if !(pair[1].0 > pair[0].0) {
                return Err(Error::invalid("accuracy curve z values must strictly increase"));
            }
        }
        if points.iter().any(|&(z, a)| !z.is_finite() || !(0.0..=1.0).contains(&a)) {
            return Err(Error::invalid("accuracy values must lie in [0, 1]"));
        }
        Ok(AccuracyCurve { points })
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    pub fn eval(&self, z: f64) -> f64 {
        let z = z.clamp(0.0, 1.0);
        let idx = self.points.partition_point(|&(pz, _)| pz <= z);
        if idx == 0 {
            return self.points[0].1;
        }
        if idx == self.points.len() {
            return self.points[self.points.len() - 1].1;
        }
        let (z0, a0) = self.points[idx - 1];
        let (z1, a1) = self.points[idx];
        a0 + (a1 - a0) * (z - z0) / (z1 - z0)
    }
}

impl TryFrom<Vec<(f64, f64)>> for AccuracyCurve {
    type Error = Error;
    fn try_from(points: Vec<(f64, f64)>) -> Result<Self> {
        AccuracyCurve::new(points)
    }
}

impl From<AccuracyCurve> for Vec<(f64, f64)> {
    fn from(curve: AccuracyCurve) -> Self {
        curve.points
    }
}

/// Display names for the slow engine's default four-stage trace.
pub const SLOW_STAGE_NAMES: [&str; 4] =
    ["decomposition", "dimension_evaluation", "synthesis", "confidence_estimation"];

/// Full behavioral description of one simulated engine.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EngineProfile {
    pub strategy: Strategy,
    pub accuracy: AccuracyCurve,
    pub token_cost: CostStats,
    pub latency: CostStats,
    /// When present, responses carry a per-stage token breakdown allocated
    /// by these fractions (which must sum to one).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stage_fractions: Option<Vec<f64>>,
}

impl EngineProfile {
    pub fn validate(&self) -> Result<()> {
        self.token_cost.validate()?;
        self.latency.validate()?;
        if let Some(fractions) = &self.stage_fractions {
            if fractions.is_empty() {
                return Err(Error::invalid("stage fractions must be non-empty when present"));
            }
            if fractions.iter().any(|f| !f.is_finite() || *f < 0.0) {
                return Err(Error::invalid("stage fractions must be non-negative"));
            }
            let sum: f64 = fractions.iter().sum();
            if (sum - 1.0).abs() > PROB_SUM_TOL {
                return Err(Error::invalid(format!(
                    "stage fractions sum to {sum}, expected 1"
                )));
            }
        }
        Ok(())
    }

    /// Default single-pass engine: ~145 tokens, ~1.2 s, excellent below
    /// z = 0.35 and collapsing toward 0.15 accuracy at z = 1.
    pub fn fast_default() -> EngineProfile {
        EngineProfile {
            strategy: Strategy::Fast,
            accuracy: AccuracyCurve::new(vec![
                (0.0, 0.95),
                (0.35, 0.93),
                (0.55, 0.77),
                (1.0, 0.15),
            ])
            .expect("default curve is valid"),
            token_cost: CostStats { mean: 145.0, std: 23.0 },
            latency: CostStats { mean: 1.2, std: 0.3 },
            stage_fractions: None,
        }
    }

    /// Default deliberate engine: ~342 tokens, ~3.8 s, four-stage trace,
    /// degrading only to 0.70 accuracy at z = 1.
    pub fn slow_default() -> EngineProfile {
        EngineProfile {
            strategy: Strategy::Slow,
            accuracy: AccuracyCurve::new(vec![
                (0.0, 0.88),
                (0.35, 0.82),
                (0.55, 0.785),
                (1.0, 0.70),
            ])
            .expect("default curve is valid"),
            token_cost: CostStats { mean: 342.0, std: 45.0 },
            latency: CostStats { mean: 3.8, std: 0.7 },
            stage_fractions: Some(vec![0.25, 0.40, 0.20, 0.15]),
        }
    }
}

/// The fast/slow pair used throughout a simulation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EngineProfiles {
    pub fast: EngineProfile,
    pub slow: EngineProfile,
}

impl Default for EngineProfiles {
    fn default() -> Self {
        EngineProfiles { fast: EngineProfile::fast_default(), slow: EngineProfile::slow_default() }
    }
}

impl EngineProfiles {
    pub fn validate(&self) -> Result<()> {
        self.fast.validate()?;
        self.slow.validate()?;
        if self.fast.strategy != Strategy::Fast || self.slow.strategy != Strategy::Slow {
            return Err(Error::invalid("engine profiles assigned to the wrong strategies"));
        }
        Ok(())
    }

    pub fn get(&self, strategy: Strategy) -> &EngineProfile {
        match strategy {
            Strategy::Fast => &self.fast,
            Strategy::Slow => &self.slow,
        }
    }
}

/// A benchmark query: the routable record plus simulation ground truth.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulatedQuery {
    pub record: QueryRecord,
    /// Latent complexity `z` in [0, 1] that drove generation; engines read
    /// their accuracy off this.
    pub latent_complexity: f64,
    /// Strategy with the higher expected utility for this query.
    pub oracle_label: Strategy,
    pub category: TaskCategory,
}

/// One simulated engine response.
///
/// By convention answer 0 is the correct one; incorrect responses pick a
/// wrong answer id elsewhere (the benchmark layer handles that).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EngineResponse {
    pub correct: bool,
    pub tokens: u64,
    pub latency_s: f64,
    /// Self-reported confidence: true expected accuracy plus uniform noise
    /// of half-width 0.1, clamped to [0, 1].
    pub confidence: f64,
    /// Per-stage token counts (sums to `tokens`) when the profile defines
    /// stage fractions.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stage_trace: Option<Vec<u64>>,
}

/// Integer token allocation by largest remainder: totals are preserved
/// exactly and each stage gets at least its floor.
fn allocate_stages(total: u64, fractions: &[f64]) -> Vec<u64> {
    let mut floors = Vec::with_capacity(fractions.len());
    let mut remainders: Vec<(usize, f64)> = Vec::with_capacity(fractions.len());
    let mut allocated = 0u64;
    for (i, &f) in fractions.iter().enumerate() {
        let target = f * total as f64;
        let floor = target.floor() as u64;
        floors.push(floor);
        allocated += floor;
        remainders.push((i, target - floor as f64));
    }
    let mut leftover = total - allocated.min(total);
    remainders.sort_by(|a, b| b.1.partial_cmp(&a.1).expect("finite remainders").then(a.0.cmp(&b.0)));
    for (i, _) in remainders {
        if leftover == 0 {
            break;
        }
        floors[i] += 1;
        leftover -= 1;
    }
    floors
}

/// Simulate one engine call.
///
/// Exactly six uniform draws are consumed, in a fixed order: correctness,
/// token cost (two draws), latency (two draws), confidence. Keying streams
/// per `(query, repeat, strategy)` therefore makes paired comparisons
/// line up exactly across baselines.
pub fn respond(
    profile: &EngineProfile,
    query: &SimulatedQuery,
    stream: &mut RngStream,
) -> EngineResponse {
    let z = query.latent_complexity.clamp(0.0, 1.0);
    let accuracy = profile.accuracy.eval(z);

    let correct = stream.next_f64() < accuracy;
    let tokens_raw = profile.token_cost.mean + profile.token_cost.std * stream.next_normal();
    let tokens = tokens_raw.max(1.0).round() as u64;
    let latency_s = (profile.latency.mean + profile.latency.std * stream.next_normal()).max(1e-3);
    let confidence = (accuracy + (stream.next_f64() * 0.2 - 0.1)).clamp(0.0, 1.0);

    let stage_trace = profile
        .stage_fractions
        .as_ref()
        .map(|fractions| allocate_stages(tokens, fractions));

    EngineResponse { correct, tokens, latency_s, confidence, stage_trace }
}

/// Cost weighting for oracle utility: `utility = accuracy
/// - lambda_cost * expected_tokens / 1000`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct UtilityConfig {
    pub lambda_cost: f64,
}

impl Default for UtilityConfig {
    fn default() -> Self {
        UtilityConfig { lambda_cost: 0.1 }
    }
}

impl UtilityConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.lambda_cost.is_finite() && self.lambda_cost >= 0.0) {
            return Err(Error::invalid("lambda_cost must be non-negative and finite"));
        }
        Ok(())
    }
}

/// Expected utility of running `profile` on a query of complexity `z`.
pub fn strategy_utility(profile: &EngineProfile, z: f64, utility: &UtilityConfig) -> f64 {
    profile.accuracy.eval(z) - utility.lambda_cost * profile.token_cost.mean / 1000.0
}

/// Utility-optimal strategy for a given latent complexity; exact ties go
/// fast (never pay more for the same expected accuracy).
pub fn oracle_for_complexity(
    z: f64,
    profiles: &EngineProfiles,
    utility: &UtilityConfig,
) -> Strategy {
    let fast = strategy_utility(&profiles.fast, z, utility);
    let slow = strategy_utility(&profiles.slow, z, utility);
    if slow > fast {
        Strategy::Slow
    } else {
        Strategy::Fast
    }
}

/// Utility-optimal strategy for a query.
pub fn oracle_best_strategy(
    query: &SimulatedQuery,
    profiles: &EngineProfiles,
    utility: &UtilityConfig,
) -> Strategy {
    oracle_for_complexity(query.latent_complexity, profiles, utility)
}
