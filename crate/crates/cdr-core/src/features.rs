//! Query complexity features.
//!
//! A query is summarized by four scalars before routing:
//!
//! * `c_s` — correlation strength: how predictable the target variable is
//!   from the query's evidence, as normalized mutual information
//!   `I(X;Y) / H(Y)`. Computed exactly when a discrete joint is available,
//!   otherwise predicted from an embedding by a learned regressor.
//! * `d_c` — domain crossing: distinct concept clusters over concept count.
//! * `s_m` — stakeholder multiplicity: `ln(1 + stakeholders)`.
//! * `u_l` — uncertainty level: one minus the top candidate probability.
//!
//! High correlation strength argues for the fast strategy; the other three
//! argue for the slow one.

use crate::error::{Error, FeatureDimension, Result};
use crate::numeric::{
    entropy, mi_exact, mlp_forward, DiscreteJoint, MlpParams, RealVector,
};
use serde::{Deserialize, Serialize};

/// How the correlation-strength evidence arrives with a query.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CorrelationInput {
    /// Exact discrete joint between evidence X and target Y.
    Joint(DiscreteJoint),
    /// Dense query embedding; requires a fitted [`CorrelationModel`].
    Embedding(RealVector),
}

/// One routable query, as found in corpus files (one JSON object per line).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QueryRecord {
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub text: Option<String>,
    /// One embedding per concept the query touches.
    pub concept_embeddings: Vec<RealVector>,
    pub stakeholder_count: u32,
    /// Probabilities over candidate answers (must sum to one).
    pub candidate_probs: Vec<f64>,
    pub correlation: CorrelationInput,
}

/// The four complexity features, in canonical order
/// `[c_s, d_c, s_m, u_l]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub c_s: f64,
    pub d_c: f64,
    pub s_m: f64,
    pub u_l: f64,
}

impl FeatureVector {
    pub fn new(c_s: f64, d_c: f64, s_m: f64, u_l: f64) -> Result<Self> {
        for (name, v, hi_bounded) in [
            ("c_s", c_s, true),
            ("d_c", d_c, true),
            ("s_m", s_m, false),
            ("u_l", u_l, true),
        ] {
            if !v.is_finite() || v < 0.0 || (hi_bounded && v > 1.0) {
                return Err(Error::invalid(format!(
                    "feature {name} = {v} outside its admissible range"
                )));
            }
        }
        Ok(FeatureVector { c_s, d_c, s_m, u_l })
    }

    /// Canonical array layout used by every routing policy.
    pub fn as_array(&self) -> [f64; 4] {
        [self.c_s, self.d_c, self.s_m, self.u_l]
    }
}

/// Normalized mutual information `I(X;Y) / H(Y)` of a discrete joint.
///
/// 1 means Y is a function of X (fast, pattern-completable); 0 means the
/// evidence says nothing. Errors with [`Error::DegenerateTarget`] when
/// `H(Y) = 0` (the ratio is undefined; there is nothing to predict).
pub fn correlation_strength(joint: &DiscreteJoint) -> Result<f64> {
    let h_y = entropy(&joint.y_marginal())?;
    if h_y == 0.0 {
        return Err(Error::DegenerateTarget(
            "target variable has zero entropy; correlation strength is undefined".to_string(),
        ));
    }
    Ok((mi_exact(joint) / h_y).clamp(0.0, 1.0))
}

/// Regressor mapping a query embedding to predicted correlation strength.
///
/// Scalar-output network; predictions are clamped to [0, 1].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationModel {
    params: MlpParams,
}

impl CorrelationModel {
    pub fn new(params: MlpParams) -> Result<Self> {
        if params.output_size() != 1 {
            return Err(Error::dims(format!(
                "correlation model must have scalar output, got {}",
                params.output_size()
            )));
        }
        Ok(CorrelationModel { params })
    }

    pub fn input_size(&self) -> usize {
        self.params.input_size()
    }

    pub fn params(&self) -> &MlpParams {
        &self.params
    }

    pub fn predict(&self, embedding: &RealVector) -> Result<f64> {
        let out = mlp_forward(&self.params, embedding)?;
        Ok(out.as_slice()[0].clamp(0.0, 1.0))
    }
}

/// Parameters for [`cluster_concepts`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ClusteringConfig {
    /// Groups smaller than this dissolve into singletons.
    pub min_cluster_size: usize,
    /// Maximum Euclidean gap bridged when growing a cluster.
    pub merge_distance: f64,
}

impl Default for ClusteringConfig {
    fn default() -> Self {
        ClusteringConfig { min_cluster_size: 2, merge_distance: 0.5 }
    }
}

impl ClusteringConfig {
    pub fn validate(&self) -> Result<()> {
        if self.min_cluster_size == 0 {
            return Err(Error::invalid("min_cluster_size must be at least 1"));
        }
        if !(self.merge_distance.is_finite() && self.merge_distance > 0.0) {
            return Err(Error::invalid("merge_distance must be positive and finite"));
        }
        Ok(())
    }
}

/// Concept-to-cluster assignment produced by [`cluster_concepts`].
///
/// Cluster ids are contiguous from 0 in order of first occurrence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterAssignment {
    pub(crate) labels: Vec<usize>,
    pub(crate) cluster_count: usize,
}

impl ClusterAssignment {
    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn cluster_count(&self) -> usize {
        self.cluster_count
    }
}

/// Single-linkage agglomerative clustering with a distance cutoff.
///
/// Starts from singletons and repeatedly merges the pair of clusters with
/// the smallest minimum member distance, while that distance is at most
/// `merge_distance`. Afterwards, clusters smaller than `min_cluster_size`
/// dissolve back into singletons. Ties pick the earliest pair in cluster
/// order, so results are deterministic.
pub fn cluster_concepts(
    embeddings: &[RealVector],
    config: &ClusteringConfig,
) -> Result<ClusterAssignment> {
    config.validate()?;
    let n = embeddings.len();
    if n == 0 {
        return Err(Error::invalid("cannot cluster an empty concept list"));
    }
    let dim = embeddings[0].len();
    if embeddings.iter().any(|e| e.len() != dim) {
        return Err(Error::dims("concept embeddings differ in dimension"));
    }

    let mut dist = vec![0.0; n * n];
    for i in 0..n {
        for j in (i + 1)..n {
            let d = embeddings[i].distance(&embeddings[j])?;
            dist[i * n + j] = d;
            dist[j * n + i] = d;
        }
    }

    let mut clusters: Vec<Vec<usize>> = (0..n).map(|i| vec![i]).collect();
    while clusters.len() > 1 {
        let mut best: Option<(usize, usize, f64)> = None;
        for a in 0..clusters.len() {
            for b in (a + 1)..clusters.len() {
                let mut d = f64::INFINITY;
                for &i in &clusters[a] {
                    for &j in &clusters[b] {
                        d = d.min(dist[i * n + j]);
                    }
                }
                if best.map_or(true, |(_, _, bd)| d < bd) {
                    best = Some((a, b, d));
                }
            }
        }
        let (a, b, d) = best.expect("at least one pair");
        if d > config.merge_distance {
            break;
        }
        let absorbed = clusters.remove(b);
        clusters[a].extend(absorbed);
        clusters[a].sort_unstable();
    }

    let mut final_clusters = Vec::with_capacity(clusters.len());
    for cluster in clusters {
        if cluster.len() < config.min_cluster_size {
            for member in cluster {
                final_clusters.push(vec![member]);
            }
        } else {
            final_clusters.push(cluster);
        }
    }

    // Canonical ids: clusters numbered by their earliest member.
    final_clusters.sort_by_key(|c| c[0]);
    let mut labels = vec![0; n];
    for (id, cluster) in final_clusters.iter().enumerate() {
        for &member in cluster {
            labels[member] = id;
        }
    }
    Ok(ClusterAssignment { labels, cluster_count: final_clusters.len() })
}

/// Fraction of concepts that start their own cluster: distinct clusters over
/// concept count, in (0, 1].
pub fn domain_crossing(assignment: &ClusterAssignment, concept_count: usize) -> Result<f64> {
    if concept_count == 0 {
        return Err(Error::invalid("concept count must be positive"));
    }
    if assignment.labels.len() != concept_count {
        return Err(Error::dims(format!(
            "assignment covers {} concepts, expected {concept_count}",
            assignment.labels.len()
        )));
    }
    Ok(assignment.cluster_count as f64 / concept_count as f64)
}

/// `ln(1 + count)`: zero for a single implicit stakeholder-free query,
/// growing sublinearly.
pub fn stakeholder_multiplicity(count: u32) -> f64 {
    (1.0 + f64::from(count)).ln()
}

/// One minus the highest candidate probability, in [0, 1].
pub fn uncertainty_level(candidate_probs: &[f64]) -> Result<f64> {
    crate::numeric::validate_distribution(candidate_probs, "candidate probabilities")?;
    let top = candidate_probs.iter().cloned().fold(0.0, f64::max);
    Ok((1.0 - top).clamp(0.0, 1.0))
}

/// Compute all four features for one query.
///
/// `model` is only consulted for embedding-style correlation evidence; a
/// query carrying an exact joint never needs it. Failures are tagged with
/// the offending [`FeatureDimension`].
pub fn extract_features(
    query: &QueryRecord,
    model: Option<&CorrelationModel>,
    clustering: &ClusteringConfig,
) -> Result<FeatureVector> {
    let c_s = match &query.correlation {
        CorrelationInput::Joint(joint) => correlation_strength(joint)
            .map_err(|e| e.for_feature(FeatureDimension::CorrelationStrength))?,
        CorrelationInput::Embedding(embedding) => {
            let model = model.ok_or_else(|| {
                Error::invalid("query carries an embedding but no correlation model was supplied")
                    .for_feature(FeatureDimension::CorrelationStrength)
            })?;
            model
                .predict(embedding)
                .map_err(|e| e.for_feature(FeatureDimension::CorrelationStrength))?
        }
    };

    let assignment = cluster_concepts(&query.concept_embeddings, clustering)
        .map_err(|e| e.for_feature(FeatureDimension::DomainCrossing))?;
    let d_c = domain_crossing(&assignment, query.concept_embeddings.len())
        .map_err(|e| e.for_feature(FeatureDimension::DomainCrossing))?;

    let s_m = stakeholder_multiplicity(query.stakeholder_count);

    let u_l = uncertainty_level(&query.candidate_probs)
        .map_err(|e| e.for_feature(FeatureDimension::UncertaintyLevel))?;

    FeatureVector::new(c_s, d_c, s_m, u_l)
}
