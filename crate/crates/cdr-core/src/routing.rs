//! Strategy selection: score a query's features, compare against an adaptive
//! threshold, dispatch to the fast or slow reasoning strategy.
//!
//! Scores increase with complexity. A query routes fast when its score falls
//! strictly below the threshold; ties deliberate (the safe default).

mod fit;
mod threshold;

pub use fit::{fit_linear, fit_neural, fit_tree};
pub use threshold::{OutcomeRecord, ThresholdConfig, ThresholdState};

use crate::error::{Error, Result};
use crate::features::FeatureVector;
use crate::numeric::{mlp_forward, MlpParams, OutputActivation, RealVector};
use serde::{Deserialize, Serialize};

/// The two reasoning strategies a query can be dispatched to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    /// Single-pass pattern completion: cheap, strong on low-complexity input.
    Fast,
    /// Staged deliberation: several times the cost, degrades more slowly
    /// with complexity.
    Slow,
}

impl Strategy {
    pub fn other(self) -> Strategy {
        match self {
            Strategy::Fast => Strategy::Slow,
            Strategy::Slow => Strategy::Fast,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Strategy::Fast => "fast",
            Strategy::Slow => "slow",
        }
    }
}

impl std::fmt::Display for Strategy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Linear complexity score: the dot product of four weights with
/// `[c_s, d_c, s_m, u_l]`. No intercept; [`fit_linear`] calibrates weights so
/// the decision boundary sits at a score of 0.5.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearPolicy {
    weights: [f64; 4],
}

impl LinearPolicy {
    pub fn new(weights: [f64; 4]) -> Result<Self> {
        if weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::invalid("linear policy weights must be finite"));
        }
        Ok(LinearPolicy { weights })
    }

    pub fn weights(&self) -> [f64; 4] {
        self.weights
    }

    pub fn score(&self, features: &FeatureVector) -> f64 {
        self.weights
            .iter()
            .zip(features.as_array())
            .map(|(w, x)| w * x)
            .sum()
    }
}

/// Complexity score from a small sigmoid-output network over the four
/// features; scores live in (0, 1).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "NeuralPolicyRaw", into = "NeuralPolicyRaw")]
pub struct NeuralPolicy {
    params: MlpParams,
}

#[derive(Serialize, Deserialize)]
struct NeuralPolicyRaw {
    params: MlpParams,
}

impl TryFrom<NeuralPolicyRaw> for NeuralPolicy {
    type Error = Error;
    fn try_from(raw: NeuralPolicyRaw) -> Result<Self> {
        NeuralPolicy::new(raw.params)
    }
}

impl From<NeuralPolicy> for NeuralPolicyRaw {
    fn from(p: NeuralPolicy) -> Self {
        NeuralPolicyRaw { params: p.params }
    }
}

impl NeuralPolicy {
    pub fn new(params: MlpParams) -> Result<Self> {
        if params.input_size() != 4 || params.output_size() != 1 {
            return Err(Error::dims(format!(
                "neural policy must map 4 features to 1 score, got {} -> {}",
                params.input_size(),
                params.output_size()
            )));
        }
        if params.output_activation() != OutputActivation::Sigmoid {
            return Err(Error::invalid(
                "neural policy requires a sigmoid output so scores stay in (0, 1)",
            ));
        }
        Ok(NeuralPolicy { params })
    }

    pub fn params(&self) -> &MlpParams {
        &self.params
    }

    pub fn score(&self, features: &FeatureVector) -> f64 {
        let input = RealVector::new(features.as_array().to_vec())
            .expect("feature vectors are finite by construction");
        mlp_forward(&self.params, &input)
            .expect("input size validated at construction")
            .as_slice()[0]
    }
}

/// One node of a decision tree over the four features.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TreeNode {
    /// Terminal: score is the slow-label fraction of the training samples
    /// that reached this leaf.
    Leaf { score: f64 },
    /// `features[feature] < threshold` goes left, otherwise right.
    Split {
        feature: usize,
        threshold: f64,
        left: Box<TreeNode>,
        right: Box<TreeNode>,
    },
}

impl TreeNode {
    fn depth(&self) -> usize {
        match self {
            TreeNode::Leaf { .. } => 0,
            TreeNode::Split { left, right, .. } => 1 + left.depth().max(right.depth()),
        }
    }

    fn check(&self) -> Result<()> {
        match self {
            TreeNode::Leaf { score } => {
                if !(score.is_finite() && (0.0..=1.0).contains(score)) {
                    return Err(Error::invalid(format!("leaf score {score} outside [0, 1]")));
                }
            }
            TreeNode::Split { feature, threshold, left, right } => {
                if *feature >= 4 {
                    return Err(Error::invalid(format!(
                        "split feature index {feature} out of range (4 features)"
                    )));
                }
                if !threshold.is_finite() {
                    return Err(Error::invalid("split threshold must be finite"));
                }
                left.check()?;
                right.check()?;
            }
        }
        Ok(())
    }
}

/// Axis-aligned decision-tree scorer; scores in [0, 1].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "TreePolicyRaw", into = "TreePolicyRaw")]
pub struct TreePolicy {
    root: TreeNode,
    max_depth: usize,
}

#[derive(Serialize, Deserialize)]
struct TreePolicyRaw {
    root: TreeNode,
    max_depth: usize,
}

impl TryFrom<TreePolicyRaw> for TreePolicy {
    type Error = Error;
    fn try_from(raw: TreePolicyRaw) -> Result<Self> {
        TreePolicy::new(raw.root, raw.max_depth)
    }
}

impl From<TreePolicy> for TreePolicyRaw {
    fn from(p: TreePolicy) -> Self {
        TreePolicyRaw { root: p.root, max_depth: p.max_depth }
    }
}

impl TreePolicy {
    pub fn new(root: TreeNode, max_depth: usize) -> Result<Self> {
        if max_depth == 0 {
            return Err(Error::invalid("tree max_depth must be at least 1"));
        }
        root.check()?;
        let depth = root.depth();
        if depth > max_depth {
            return Err(Error::invalid(format!(
                "tree depth {depth} exceeds declared max_depth {max_depth}"
            )));
        }
        Ok(TreePolicy { root, max_depth })
    }

    pub fn root(&self) -> &TreeNode {
        &self.root
    }

    pub fn max_depth(&self) -> usize {
        self.max_depth
    }

    pub fn depth(&self) -> usize {
        self.root.depth()
    }

    pub fn score(&self, features: &FeatureVector) -> f64 {
        let x = features.as_array();
        let mut node = &self.root;
        loop {
            match node {
                TreeNode::Leaf { score } => return *score,
                TreeNode::Split { feature, threshold, left, right } => {
                    node = if x[*feature] < *threshold { left } else { right };
                }
            }
        }
    }
}

/// Any of the three scorers, as stored in policy files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "parameters", rename_all = "snake_case")]
pub enum RoutingPolicy {
    Linear(LinearPolicy),
    Neural(NeuralPolicy),
    Tree(TreePolicy),
}

impl RoutingPolicy {
    pub fn kind(&self) -> &'static str {
        match self {
            RoutingPolicy::Linear(_) => "linear",
            RoutingPolicy::Neural(_) => "neural",
            RoutingPolicy::Tree(_) => "tree",
        }
    }

    pub fn score(&self, features: &FeatureVector) -> f64 {
        match self {
            RoutingPolicy::Linear(p) => p.score(features),
            RoutingPolicy::Neural(p) => p.score(features),
            RoutingPolicy::Tree(p) => p.score(features),
        }
    }
}

/// Version stamp written into policy files.
pub const POLICY_FORMAT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct PolicyDocument {
    version: u32,
    #[serde(flatten)]
    policy: RoutingPolicy,
}

/// Serialize a policy to its JSON document form:
/// `{"version": 1, "kind": "...", "parameters": {...}}`.
pub fn policy_to_json(policy: &RoutingPolicy) -> String {
    let doc = PolicyDocument { version: POLICY_FORMAT_VERSION, policy: policy.clone() };
    let mut text = serde_json::to_string_pretty(&doc).expect("policies are serializable");
    text.push('\n');
    text
}

/// Parse and validate a policy document. Structural problems (bad shapes,
/// out-of-range leaf scores, unknown versions) surface as
/// [`Error::InvalidPolicy`].
pub fn policy_from_json(text: &str) -> Result<RoutingPolicy> {
    let doc: PolicyDocument =
        serde_json::from_str(text).map_err(|e| Error::InvalidPolicy(e.to_string()))?;
    if doc.version != POLICY_FORMAT_VERSION {
        return Err(Error::InvalidPolicy(format!(
            "unsupported policy format version {} (expected {POLICY_FORMAT_VERSION})",
            doc.version
        )));
    }
    Ok(doc.policy)
}

/// The outcome of routing one query.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RoutingDecision {
    pub strategy: Strategy,
    pub score: f64,
    /// Threshold in force when the decision was made.
    pub tau: f64,
    pub features: FeatureVector,
}

/// Dispatch on `score < tau`: strictly below routes fast, at or above routes
/// slow. `score` must be finite.
pub fn route(score: f64, state: &ThresholdState, features: FeatureVector) -> RoutingDecision {
    debug_assert!(score.is_finite(), "routing scores must be finite");
    let tau = state.tau();
    let strategy = if score < tau { Strategy::Fast } else { Strategy::Slow };
    RoutingDecision { strategy, score, tau, features }
}
