//! Synthetic benchmark corpus.
//!
//! Each query is driven by a latent complexity `z` drawn uniformly from its
//! category's range; the four observable features are then realized as noisy
//! monotone functions of `z`:
//!
//! * correlation strength falls with `z` (a binary-symmetric joint is tuned
//!   by bisection so its exact normalized MI hits the target),
//! * concept count and cluster count rise with `z` (cluster centers sit far
//!   apart on coordinate axes, jitter keeps members tightly grouped),
//! * stakeholder count rises with `z`,
//! * uncertainty rises with `z` through the candidate-answer distribution.
//!
//! Oracle labels come from expected utility under the supplied engine
//! profiles, so a generated corpus is always labeled consistently with the
//! engines that will consume it.

use crate::engines::{oracle_for_complexity, EngineProfiles, SimulatedQuery, TaskCategory, UtilityConfig};
use crate::error::{Error, Result};
use crate::features::{correlation_strength, CorrelationInput, QueryRecord};
use crate::numeric::{DiscreteJoint, RealVector};
use crate::rng::{label, StreamKey};
use serde::{Deserialize, Serialize};

/// Uniform latent-complexity range for each category.
pub fn category_complexity_range(category: TaskCategory) -> (f64, f64) {
    match category {
        TaskCategory::Factual => (0.0, 0.3),
        TaskCategory::CorrelationPrediction => (0.25, 0.65),
        TaskCategory::MultiStakeholder => (0.35, 0.75),
        TaskCategory::CrossDomain => (0.4, 0.8),
        TaskCategory::ProfessionalJudgment => (0.6, 1.0),
    }
}

/// Proportion of the corpus drawn from each category.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CategoryMix {
    pub factual: f64,
    pub correlation_prediction: f64,
    pub multi_stakeholder: f64,
    pub cross_domain: f64,
    pub professional_judgment: f64,
}

impl Default for CategoryMix {
    fn default() -> Self {
        CategoryMix {
            factual: 0.2,
            correlation_prediction: 0.2,
            multi_stakeholder: 0.2,
            cross_domain: 0.2,
            professional_judgment: 0.2,
        }
    }
}

impl CategoryMix {
    /// Proportions in [`TaskCategory::ALL`] order.
    pub fn as_array(&self) -> [f64; 5] {
        [
            self.factual,
            self.correlation_prediction,
            self.multi_stakeholder,
            self.cross_domain,
            self.professional_judgment,
        ]
    }

    pub fn validate(&self) -> Result<()> {
        let arr = self.as_array();
        if arr.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return Err(Error::invalid(
                "category_mix proportions must be finite and non-negative",
            ));
        }
        let sum: f64 = arr.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::invalid(format!(
                "category_mix proportions sum to {sum}, expected 1"
            )));
        }
        Ok(())
    }
}

/// Size, seed and noise settings for corpus generation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CorpusSpec {
    pub n_queries: usize,
    pub seed: u64,
    pub category_mix: CategoryMix,
    /// Standard deviation of the Gaussian noise between latent complexity
    /// and each realized feature target (0 = perfectly separable).
    pub feature_noise: f64,
}

impl Default for CorpusSpec {
    fn default() -> Self {
        CorpusSpec {
            n_queries: 2000,
            seed: 42,
            category_mix: CategoryMix::default(),
            feature_noise: 0.05,
        }
    }
}

impl CorpusSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n_queries == 0 {
            return Err(Error::invalid("n_queries must be at least 1"));
        }
        if !(self.feature_noise.is_finite() && (0.0..=0.5).contains(&self.feature_noise)) {
            return Err(Error::invalid("feature_noise must lie in [0, 0.5]"));
        }
        self.category_mix.validate()
    }
}

/// Integer apportionment by largest remainder; preserves the total exactly.
/// Fractional-part ties resolve to the earlier index.
fn largest_remainder(total: usize, weights: &[f64; 5]) -> [usize; 5] {
    let mut counts = [0usize; 5];
    let mut remainders: Vec<(usize, f64)> = Vec::with_capacity(5);
    let mut allocated = 0usize;
    for (i, &w) in weights.iter().enumerate() {
        let target = w * total as f64;
        let floor = target.floor() as usize;
        counts[i] = floor;
        allocated += floor;
        remainders.push((i, target - floor as f64));
    }
    remainders.sort_by(|a, b| b.1.partial_cmp(&a.1).expect("finite remainders").then(a.0.cmp(&b.0)));
    for (i, _) in remainders.into_iter().take(total.saturating_sub(allocated)) {
        counts[i] += 1;
    }
    counts
}

/// Flip probability whose binary-symmetric joint has the given exact
/// correlation strength. Monotone bisection on [0, 0.5].
fn flip_for_strength(target: f64) -> f64 {
    let strength = |flip: f64| -> f64 {
        let joint = DiscreteJoint::binary_symmetric(flip).expect("flip within [0, 0.5]");
        correlation_strength(&joint).expect("uniform target marginal has positive entropy")
    };
    let (mut lo, mut hi) = (0.0f64, 0.5f64);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if strength(mid) > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

const EMBEDDING_DIM: usize = 8;
const CANDIDATE_ANSWERS: usize = 4;
const MAX_STAKEHOLDERS: f64 = 12.0;

/// Generate a labeled corpus. Deterministic given `(spec, profiles, utility)`
/// and independent of evaluation order: every query derives its own streams
/// from the spec seed and its index.
pub fn generate_corpus(
    spec: &CorpusSpec,
    profiles: &EngineProfiles,
    utility: &UtilityConfig,
) -> Result<Vec<SimulatedQuery>> {
    spec.validate()?;
    profiles.validate()?;
    utility.validate()?;

    let counts = largest_remainder(spec.n_queries, &spec.category_mix.as_array());
    let mut categories = Vec::with_capacity(spec.n_queries);
    for (cat, &count) in TaskCategory::ALL.iter().zip(&counts) {
        categories.extend(std::iter::repeat(*cat).take(count));
    }
    let root = StreamKey::root(spec.seed);
    root.child(label::CATEGORY).stream().shuffle(&mut categories);

    let sigma = spec.feature_noise;
    let mut corpus = Vec::with_capacity(spec.n_queries);
    for (i, &category) in categories.iter().enumerate() {
        let qkey = root.child(label::QUERY).child(i as u64);
        let (lo, hi) = category_complexity_range(category);
        let z = lo + (hi - lo) * qkey.child(label::COMPLEXITY).stream().next_f64();

        let mut noise = qkey.child(label::NOISE).stream();

        // Correlation strength target falls with complexity.
        let c_target = (1.0 - z + sigma * noise.next_normal()).clamp(0.02, 0.98);
        let joint = DiscreteJoint::binary_symmetric(flip_for_strength(c_target))?;

        // Concept count (3..=10) and cluster count (1..=m) rise with
        // complexity; concept t joins cluster t mod k, so every cluster is
        // occupied and the realized cluster/concept ratio tracks z.
        let m = (4.0 + 4.0 * z + 2.0 * sigma * noise.next_normal())
            .round()
            .clamp(3.0, 10.0) as usize;
        let k = (1.0 + z * (m as f64 - 1.0) + sigma * m as f64 * noise.next_normal())
            .round()
            .clamp(1.0, m as f64) as usize;
        let mut jitter = qkey.child(label::SAMPLE).stream();
        let mut concept_embeddings = Vec::with_capacity(m);
        for t in 0..m {
            let cluster = t % k;
            let axis = cluster % EMBEDDING_DIM;
            let mut coords = Vec::with_capacity(EMBEDDING_DIM);
            for _ in 0..EMBEDDING_DIM {
                coords.push(jitter.next_f64() * 0.1 - 0.05);
            }
            coords[axis] += 3.0 * (cluster + 1) as f64;
            concept_embeddings.push(RealVector::new(coords)?);
        }

        // Stakeholders rise with complexity; the multi-stakeholder category
        // gets a structural bump.
        let bump = if category == TaskCategory::MultiStakeholder { 2.0 } else { 0.0 };
        let stakeholder_count = (7.0 * z + bump + 4.0 * sigma * noise.next_normal())
            .round()
            .clamp(0.0, MAX_STAKEHOLDERS) as u32;

        // Uncertainty rises with complexity; the top candidate (index 0, the
        // correct answer) keeps probability 1 - u, the rest split evenly.
        let u_target = (0.75 * z + sigma * noise.next_normal()).clamp(0.0, 0.74);
        let spread = u_target / (CANDIDATE_ANSWERS - 1) as f64;
        let mut candidate_probs = vec![spread; CANDIDATE_ANSWERS];
        candidate_probs[0] = 1.0 - u_target;

        let record = QueryRecord {
            id: format!("q{i:06}"),
            text: None,
            concept_embeddings,
            stakeholder_count,
            candidate_probs,
            correlation: CorrelationInput::Joint(joint),
        };
        corpus.push(SimulatedQuery {
            record,
            latent_complexity: z,
            oracle_label: oracle_for_complexity(z, profiles, utility),
            category,
        });
    }
    Ok(corpus)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::{extract_features, ClusteringConfig};

    fn small_spec(n: usize) -> CorpusSpec {
        CorpusSpec { n_queries: n, seed: 11, ..CorpusSpec::default() }
    }

    #[test]
    fn largest_remainder_preserves_total() {
        assert_eq!(largest_remainder(10, &[0.2; 5]), [2, 2, 2, 2, 2]);
        let counts = largest_remainder(7, &[0.5, 0.5, 0.0, 0.0, 0.0]);
        assert_eq!(counts.iter().sum::<usize>(), 7);
        assert_eq!(counts, [4, 3, 0, 0, 0]);
        let skewed = largest_remainder(100, &[0.33, 0.33, 0.34, 0.0, 0.0]);
        assert_eq!(skewed.iter().sum::<usize>(), 100);
    }

    #[test]
    fn flip_bisection_hits_targets() {
        for &target in &[0.05, 0.2781, 0.5, 0.9] {
            let flip = flip_for_strength(target);
            let joint = DiscreteJoint::binary_symmetric(flip).unwrap();
            let realized = correlation_strength(&joint).unwrap();
            assert!(
                (realized - target).abs() < 1e-9,
                "target {target}: realized {realized} at flip {flip}"
            );
        }
    }

    #[test]
    fn corpus_is_deterministic_and_sized() {
        let spec = small_spec(50);
        let profiles = EngineProfiles::default();
        let utility = UtilityConfig::default();
        let a = generate_corpus(&spec, &profiles, &utility).unwrap();
        let b = generate_corpus(&spec, &profiles, &utility).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 50);
        // Ids are unique and zero-padded.
        assert_eq!(a[7].record.id, "q000007");
    }

    #[test]
    fn category_counts_follow_mix_exactly() {
        let mut spec = small_spec(97);
        spec.category_mix = CategoryMix {
            factual: 0.5,
            correlation_prediction: 0.25,
            multi_stakeholder: 0.25,
            cross_domain: 0.0,
            professional_judgment: 0.0,
        };
        let corpus =
            generate_corpus(&spec, &EngineProfiles::default(), &UtilityConfig::default()).unwrap();
        let expected = largest_remainder(97, &spec.category_mix.as_array());
        for (idx, cat) in TaskCategory::ALL.iter().enumerate() {
            let got = corpus.iter().filter(|q| q.category == *cat).count();
            assert_eq!(got, expected[idx], "category {cat}");
        }
    }

    #[test]
    fn complexity_stays_in_category_range() {
        let corpus = generate_corpus(
            &small_spec(200),
            &EngineProfiles::default(),
            &UtilityConfig::default(),
        )
        .unwrap();
        for q in &corpus {
            let (lo, hi) = category_complexity_range(q.category);
            assert!(
                (lo..=hi).contains(&q.latent_complexity),
                "{}: z = {} outside [{lo}, {hi}]",
                q.category,
                q.latent_complexity
            );
        }
    }

    #[test]
    fn noiseless_features_track_complexity_exactly() {
        let spec = CorpusSpec { feature_noise: 0.0, ..small_spec(120) };
        let corpus =
            generate_corpus(&spec, &EngineProfiles::default(), &UtilityConfig::default()).unwrap();
        let clustering = ClusteringConfig::default();
        for q in &corpus {
            let f = extract_features(&q.record, None, &clustering).unwrap();
            let z = q.latent_complexity;
            // c_s realizes clamp(1 - z) through the tuned joint.
            let c_expected = (1.0 - z).clamp(0.02, 0.98);
            assert!(
                (f.c_s - c_expected).abs() < 1e-6,
                "{}: c_s {} vs {}",
                q.record.id,
                f.c_s,
                c_expected
            );
            // d_c realizes k/m exactly: clusters are well separated.
            let m = (4.0 + 4.0 * z).round().clamp(3.0, 10.0);
            let k = (1.0 + z * (m - 1.0)).round().clamp(1.0, m);
            assert!(
                (f.d_c - k / m).abs() < 1e-12,
                "{}: d_c {} vs {}/{}",
                q.record.id,
                f.d_c,
                k,
                m
            );
            // u_l realizes 0.75 z clamped.
            let u_expected = (0.75 * z).clamp(0.0, 0.74);
            assert!((f.u_l - u_expected).abs() < 1e-9);
        }
    }

    #[test]
    fn oracle_labels_match_engine_utilities() {
        let profiles = EngineProfiles::default();
        let utility = UtilityConfig::default();
        let corpus = generate_corpus(&small_spec(150), &profiles, &utility).unwrap();
        for q in &corpus {
            assert_eq!(
                q.oracle_label,
                oracle_for_complexity(q.latent_complexity, &profiles, &utility)
            );
        }
        // Factual queries under the default profiles are all fast-optimal.
        assert!(corpus
            .iter()
            .filter(|q| q.category == TaskCategory::Factual)
            .all(|q| q.oracle_label == crate::routing::Strategy::Fast));
    }

    #[test]
    fn candidate_probabilities_are_valid_distributions() {
        let corpus = generate_corpus(
            &small_spec(80),
            &EngineProfiles::default(),
            &UtilityConfig::default(),
        )
        .unwrap();
        for q in &corpus {
            let sum: f64 = q.record.candidate_probs.iter().sum();
            assert!((sum - 1.0).abs() < 1e-9);
            // Index 0 carries the top probability.
            let top = q.record.candidate_probs[0];
            assert!(q.record.candidate_probs.iter().all(|&p| p <= top));
            assert!(top >= 0.26);
        }
    }

    #[test]
    fn spec_validation() {
        assert!(small_spec(0).validate().is_err());
        let mut bad_mix = small_spec(10);
        bad_mix.category_mix.factual = 0.1; // sum now 0.9
        let err = bad_mix.validate().unwrap_err().to_string();
        assert!(err.contains("category_mix"), "message: {err}");
        let bad_noise = CorpusSpec { feature_noise: 0.7, ..small_spec(10) };
        assert!(bad_noise.validate().is_err());
    }

    #[test]
    fn corpus_queries_serialize_line_by_line() {
        let corpus = generate_corpus(
            &small_spec(3),
            &EngineProfiles::default(),
            &UtilityConfig::default(),
        )
        .unwrap();
        for q in &corpus {
            let line = serde_json::to_string(q).unwrap();
            let back: SimulatedQuery = serde_json::from_str(&line).unwrap();
            assert_eq!(&back, q);
        }
    }
}
