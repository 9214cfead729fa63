//! Fitting routing policies to labeled feature vectors.
//!
//! Labels are the strategies an oracle (or logged experience) says each query
//! should have taken; slow maps to 1, fast to 0.

use crate::error::{Error, Result};
use crate::features::FeatureVector;
use crate::numeric::{
    mlp_train, Activation, Loss, MlpParams, OutputActivation, RealVector, SampleSet, TrainConfig,
};
use crate::rng::{self, StreamKey};

use super::{LinearPolicy, NeuralPolicy, Strategy, TreeNode, TreePolicy};

fn label(strategy: Strategy) -> f64 {
    match strategy {
        Strategy::Fast => 0.0,
        Strategy::Slow => 1.0,
    }
}

fn require_both_classes(data: &[(FeatureVector, Strategy)]) -> Result<()> {
    let has_fast = data.iter().any(|(_, s)| *s == Strategy::Fast);
    let has_slow = data.iter().any(|(_, s)| *s == Strategy::Slow);
    if !(has_fast && has_slow) {
        return Err(Error::DegenerateLabels(
            "training data contains a single strategy label".to_string(),
        ));
    }
    Ok(())
}

/// Logistic fit of the four linear weights.
///
/// The model has no intercept; instead the logistic link is centered at 0.5
/// (`p = sigmoid(w . x - 0.5)`), which pins the decision boundary of the
/// fitted scorer to a raw score of 0.5 — the router's default threshold.
/// Weights start at zero, so the fit is deterministic given `(data, config)`.
pub fn fit_linear(
    data: &[(FeatureVector, Strategy)],
    config: &TrainConfig,
) -> Result<LinearPolicy> {
    config.validate()?;
    if data.is_empty() {
        return Err(Error::invalid("cannot fit a policy to an empty data set"));
    }
    require_both_classes(data)?;

    let mut weights = [0.0f64; 4];
    let shuffle_key = StreamKey::root(config.seed).child(rng::label::SHUFFLE);
    for epoch in 0..config.epochs {
        let mut order: Vec<usize> = (0..data.len()).collect();
        shuffle_key.child(epoch as u64).stream().shuffle(&mut order);
        for batch in order.chunks(config.batch_size) {
            let mut grad = [0.0f64; 4];
            let inv = 1.0 / batch.len() as f64;
            for &i in batch {
                let (features, strategy) = &data[i];
                let x = features.as_array();
                let s: f64 = weights.iter().zip(x).map(|(w, xi)| w * xi).sum();
                let p = crate::numeric::sigmoid_raw(s - 0.5);
                let residual = (p - label(*strategy)) * inv;
                for j in 0..4 {
                    grad[j] += residual * x[j];
                }
            }
            for j in 0..4 {
                weights[j] -= config.learning_rate * grad[j];
            }
        }
        if weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::TrainingDiverged {
                epoch,
                message: "linear weights became non-finite".to_string(),
            });
        }
    }
    LinearPolicy::new(weights)
}

/// Fit a sigmoid-output network (`4 -> hidden_sizes -> 1`) by binary
/// cross-entropy.
pub fn fit_neural(
    data: &[(FeatureVector, Strategy)],
    hidden_sizes: &[usize],
    config: &TrainConfig,
) -> Result<NeuralPolicy> {
    if data.is_empty() {
        return Err(Error::invalid("cannot fit a policy to an empty data set"));
    }
    require_both_classes(data)?;

    let mut sizes = Vec::with_capacity(hidden_sizes.len() + 2);
    sizes.push(4);
    sizes.extend_from_slice(hidden_sizes);
    sizes.push(1);
    let params = MlpParams::seeded(
        sizes,
        Activation::Tanh,
        OutputActivation::Sigmoid,
        config.seed,
        config.init_scale,
    )?;

    let pairs = data
        .iter()
        .map(|(f, s)| {
            Ok((
                RealVector::new(f.as_array().to_vec())?,
                RealVector::new(vec![label(*s)])?,
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    let samples = SampleSet::new(pairs)?;
    let trained = mlp_train(params, &samples, Loss::BinaryCrossEntropy, config)?;
    NeuralPolicy::new(trained)
}

/// Greedy binary-tree induction minimizing Gini impurity.
///
/// Candidate thresholds are midpoints between consecutive distinct values of
/// each feature. Split quality is compared in exact integer arithmetic (see
/// [`SplitQuality`]), so two implementations enumerating the same candidates
/// must pick identical trees — no float near-tie drift. Ties prefer the
/// lowest feature index, then the smallest threshold. Splits are accepted
/// even at zero impurity gain as long as the node is impure, which is what
/// lets depth-2 trees carve out XOR-style interactions.
///
/// Single-class data yields a depth-0 leaf scoring that class.
pub fn fit_tree(data: &[(FeatureVector, Strategy)], max_depth: usize) -> Result<TreePolicy> {
    if data.is_empty() {
        return Err(Error::invalid("cannot fit a policy to an empty data set"));
    }
    if max_depth == 0 {
        return Err(Error::invalid("tree max_depth must be at least 1"));
    }
    let indices: Vec<usize> = (0..data.len()).collect();
    let root = grow(data, &indices, 0, max_depth);
    TreePolicy::new(root, max_depth)
}

/// Weighted Gini impurity of a candidate split, as an exact rational.
///
/// For two classes, `n * weighted_gini = 2 * (l0*l1/ln + r0*r1/rn)`, so
/// candidates order identically under the integer-valued quality
/// `num/den = (l0*l1*rn + r0*r1*ln) / (ln*rn)` (constant factors dropped).
/// Comparisons cross-multiply in u128; with n <= ~100k there is no overflow.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
struct SplitQuality {
    num: u128,
    den: u128,
}

impl SplitQuality {
    fn new(left_slow: u64, left_n: u64, right_slow: u64, right_n: u64) -> SplitQuality {
        let l0 = (left_n - left_slow) as u128;
        let l1 = left_slow as u128;
        let r0 = (right_n - right_slow) as u128;
        let r1 = right_slow as u128;
        SplitQuality {
            num: l0 * l1 * right_n as u128 + r0 * r1 * left_n as u128,
            den: left_n as u128 * right_n as u128,
        }
    }

    fn is_better_than(self, other: SplitQuality) -> bool {
        self.num * other.den < other.num * self.den
    }
}

fn grow(
    data: &[(FeatureVector, Strategy)],
    indices: &[usize],
    depth: usize,
    max_depth: usize,
) -> TreeNode {
    let n = indices.len() as u64;
    let slow_total = indices
        .iter()
        .filter(|&&i| data[i].1 == Strategy::Slow)
        .count() as u64;
    let leaf = TreeNode::Leaf { score: slow_total as f64 / n as f64 };
    if slow_total == 0 || slow_total == n || depth == max_depth {
        return leaf;
    }

    let mut best: Option<(usize, f64, SplitQuality)> = None;
    for feature in 0..4 {
        let mut order = indices.to_vec();
        order.sort_by(|&a, &b| {
            let va = data[a].0.as_array()[feature];
            let vb = data[b].0.as_array()[feature];
            va.partial_cmp(&vb).expect("features are finite").then(a.cmp(&b))
        });

        let mut left_n = 0u64;
        let mut left_slow = 0u64;
        for k in 0..order.len() - 1 {
            left_n += 1;
            if data[order[k]].1 == Strategy::Slow {
                left_slow += 1;
            }
            let here = data[order[k]].0.as_array()[feature];
            let next = data[order[k + 1]].0.as_array()[feature];
            if next <= here {
                continue;
            }
            let threshold = here + (next - here) / 2.0;
            if threshold <= here {
                // Adjacent floats: the midpoint collapsed onto the left value.
                continue;
            }
            let quality = SplitQuality::new(left_slow, left_n, slow_total - left_slow, n - left_n);
            let better = match best {
                None => true,
                Some((_, _, incumbent)) => quality.is_better_than(incumbent),
            };
            if better {
                best = Some((feature, threshold, quality));
            }
        }
    }

    match best {
        // Impure node but every feature is constant: nothing to split on.
        None => leaf,
        Some((feature, threshold, _)) => {
            let (left_idx, right_idx): (Vec<usize>, Vec<usize>) = indices
                .iter()
                .partition(|&&i| data[i].0.as_array()[feature] < threshold);
            debug_assert!(!left_idx.is_empty() && !right_idx.is_empty());
            TreeNode::Split {
                feature,
                threshold,
                left: Box::new(grow(data, &left_idx, depth + 1, max_depth)),
                right: Box::new(grow(data, &right_idx, depth + 1, max_depth)),
            }
        }
    }
}
