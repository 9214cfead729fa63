//! Self-contained numerics: dense vectors, discrete joint distributions,
//! entropy / mutual-information estimators, and a small trainable
//! feed-forward network (see [`mlp`]).
//!
//! Everything here is deterministic given explicit seeds and uses natural
//! logarithms throughout, so information quantities are in nats.

mod critic;
mod mlp;

pub use critic::{dv_estimate, mi_critic, CriticConfig};
pub use mlp::{
    gradient_check, gradient_check_set, mlp_forward, mlp_train, Activation, Loss, MlpParams,
    OutputActivation, TrainConfig,
};
pub(crate) use mlp::sigmoid as sigmoid_raw;

use crate::error::{Error, Result};
use crate::rng::RngStream;
use serde::{Deserialize, Serialize};

/// Tolerance for "these probabilities sum to one" checks.
pub const PROB_SUM_TOL: f64 = 1e-9;

/// A finite, fixed-length vector of reals.
///
/// JSON form is a bare array; JSON cannot encode non-finite floats, so
/// deserialized values satisfy the same invariant as constructed ones.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RealVector(Vec<f64>);

impl RealVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("vector entries must be finite"));
        }
        Ok(RealVector(values))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    /// Euclidean distance to another vector of the same length.
    pub fn distance(&self, other: &RealVector) -> Result<f64> {
        if self.len() != other.len() {
            return Err(Error::dims(format!(
                "distance between vectors of length {} and {}",
                self.len(),
                other.len()
            )));
        }
        let sq: f64 = self
            .0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b) * (a - b))
            .sum();
        Ok(sq.sqrt())
    }
}

impl AsRef<[f64]> for RealVector {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

impl TryFrom<Vec<f64>> for RealVector {
    type Error = Error;
    fn try_from(values: Vec<f64>) -> Result<Self> {
        RealVector::new(values)
    }
}

pub(crate) fn validate_distribution(probs: &[f64], what: &str) -> Result<()> {
    if probs.is_empty() {
        return Err(Error::invalid(format!("{what}: empty distribution")));
    }
    if probs.iter().any(|p| !p.is_finite() || *p < 0.0) {
        return Err(Error::invalid(format!(
            "{what}: probabilities must be finite and non-negative"
        )));
    }
    let sum: f64 = probs.iter().sum();
    if (sum - 1.0).abs() > PROB_SUM_TOL {
        return Err(Error::invalid(format!(
            "{what}: probabilities sum to {sum}, expected 1 within {PROB_SUM_TOL}"
        )));
    }
    Ok(())
}

/// Shannon entropy of a discrete distribution, in nats.
///
/// Zero-probability cells contribute zero. Input must be a valid distribution
/// (non-negative, summing to one within [`PROB_SUM_TOL`]).
pub fn entropy(probs: &[f64]) -> Result<f64> {
    validate_distribution(probs, "entropy")?;
    let h: f64 = probs
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| -p * p.ln())
        .sum();
    // Rounding can leave a -1e-17 residue when one cell carries ~all mass.
    Ok(h.max(0.0))
}

/// A joint distribution over two finite alphabets, stored row-major
/// (`rows` = X states, `cols` = Y states).
///
/// Serialized as a grid of rows; validation runs on deserialization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct DiscreteJoint {
    probs: Vec<f64>,
    rows: usize,
    cols: usize,
}

impl DiscreteJoint {
    /// Build from a rectangular grid of probabilities.
    pub fn new(grid: Vec<Vec<f64>>) -> Result<Self> {
        let rows = grid.len();
        if rows == 0 {
            return Err(Error::invalid("joint distribution: no rows"));
        }
        let cols = grid[0].len();
        if cols == 0 {
            return Err(Error::invalid("joint distribution: no columns"));
        }
        if grid.iter().any(|r| r.len() != cols) {
            return Err(Error::dims("joint distribution rows differ in length"));
        }
        let probs: Vec<f64> = grid.into_iter().flatten().collect();
        validate_distribution(&probs, "joint distribution")?;
        Ok(DiscreteJoint { probs, rows, cols })
    }

    /// Binary joint where Y copies X (uniform) and flips with probability
    /// `flip_prob`. `flip_prob = 0` gives perfect correlation, `0.5` none.
    pub fn binary_symmetric(flip_prob: f64) -> Result<Self> {
        if !(0.0..=0.5).contains(&flip_prob) {
            return Err(Error::invalid(format!(
                "flip probability {flip_prob} outside [0, 0.5]"
            )));
        }
        let stay = (1.0 - flip_prob) / 2.0;
        let flip = flip_prob / 2.0;
        DiscreteJoint::new(vec![vec![stay, flip], vec![flip, stay]])
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn prob(&self, x: usize, y: usize) -> f64 {
        self.probs[x * self.cols + y]
    }

    /// Marginal over X (row sums).
    pub fn x_marginal(&self) -> Vec<f64> {
        let mut m = vec![0.0; self.rows];
        for x in 0..self.rows {
            for y in 0..self.cols {
                m[x] += self.prob(x, y);
            }
        }
        m
    }

    /// Marginal over Y (column sums).
    pub fn y_marginal(&self) -> Vec<f64> {
        let mut m = vec![0.0; self.cols];
        for x in 0..self.rows {
            for y in 0..self.cols {
                m[y] += self.prob(x, y);
            }
        }
        m
    }

    /// Transposed joint (swap the roles of X and Y).
    pub fn transposed(&self) -> DiscreteJoint {
        let mut probs = vec![0.0; self.probs.len()];
        for x in 0..self.rows {
            for y in 0..self.cols {
                probs[y * self.rows + x] = self.prob(x, y);
            }
        }
        DiscreteJoint { probs, rows: self.cols, cols: self.rows }
    }

    /// Draw `n` (x, y) state-index pairs by inverse-CDF over the flattened
    /// cell probabilities.
    pub fn sample(&self, n: usize, stream: &mut RngStream) -> Result<SampleSet> {
        if n == 0 {
            return Err(Error::invalid("cannot sample an empty set"));
        }
        // Cumulative over cells; the final edge is forced to 1 so a draw of
        // ~1.0 cannot fall off the end.
        let mut cdf = Vec::with_capacity(self.probs.len());
        let mut acc = 0.0;
        for &p in &self.probs {
            acc += p;
            cdf.push(acc);
        }
        *cdf.last_mut().expect("non-empty joint") = 1.0;

        let mut pairs = Vec::with_capacity(n);
        for _ in 0..n {
            let u = stream.next_f64();
            let cell = cdf.partition_point(|&edge| edge <= u).min(self.probs.len() - 1);
            let x = (cell / self.cols) as f64;
            let y = (cell % self.cols) as f64;
            pairs.push((RealVector::new(vec![x])?, RealVector::new(vec![y])?));
        }
        SampleSet::new(pairs)
    }
}

impl TryFrom<Vec<Vec<f64>>> for DiscreteJoint {
    type Error = Error;
    fn try_from(grid: Vec<Vec<f64>>) -> Result<Self> {
        DiscreteJoint::new(grid)
    }
}

impl From<DiscreteJoint> for Vec<Vec<f64>> {
    fn from(joint: DiscreteJoint) -> Self {
        (0..joint.rows)
            .map(|x| (0..joint.cols).map(|y| joint.prob(x, y)).collect())
            .collect()
    }
}

/// Exact mutual information I(X;Y) of a discrete joint, in nats.
///
/// Sum of `p(x,y) * (ln p(x,y) - ln p(x) - ln p(y))` over non-zero cells;
/// clamped at zero against rounding residue. Symmetric under transposition
/// up to float rounding.
pub fn mi_exact(joint: &DiscreteJoint) -> f64 {
    let px = joint.x_marginal();
    let py = joint.y_marginal();
    let mut mi = 0.0;
    for x in 0..joint.rows() {
        for y in 0..joint.cols() {
            let p = joint.prob(x, y);
            if p > 0.0 {
                mi += p * (p.ln() - px[x].ln() - py[y].ln());
            }
        }
    }
    mi.max(0.0)
}

/// Paired samples of (x, y) vectors with uniform dimensions on each side.
#[derive(Debug, Clone)]
pub struct SampleSet {
    pairs: Vec<(RealVector, RealVector)>,
    x_dim: usize,
    y_dim: usize,
}

impl SampleSet {
    pub fn new(pairs: Vec<(RealVector, RealVector)>) -> Result<Self> {
        let (first_x, first_y) = pairs
            .first()
            .ok_or_else(|| Error::invalid("sample set must be non-empty"))?;
        let (x_dim, y_dim) = (first_x.len(), first_y.len());
        if x_dim == 0 || y_dim == 0 {
            return Err(Error::invalid("sample vectors must be non-empty"));
        }
        for (i, (x, y)) in pairs.iter().enumerate() {
            if x.len() != x_dim || y.len() != y_dim {
                return Err(Error::dims(format!(
                    "sample {i} has shape ({}, {}), expected ({x_dim}, {y_dim})",
                    x.len(),
                    y.len()
                )));
            }
        }
        Ok(SampleSet { pairs, x_dim, y_dim })
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn x_dim(&self) -> usize {
        self.x_dim
    }

    pub fn y_dim(&self) -> usize {
        self.y_dim
    }

    pub fn pairs(&self) -> &[(RealVector, RealVector)] {
        &self.pairs
    }
}

/// Plug-in (histogram) mutual-information estimate for scalar samples.
///
/// Both sides are partitioned into `bins` equal-width bins spanning their
/// observed range (a constant side collapses to a single bin); the empirical
/// cell frequencies then go through [`mi_exact`]. Known to be biased upward
/// for small samples; at n in the tens of thousands with a handful of bins
/// the bias is well inside a few hundredths of a nat.
pub fn mi_histogram(samples: &SampleSet, bins: usize) -> Result<f64> {
    if samples.x_dim() != 1 || samples.y_dim() != 1 {
        return Err(Error::dims(format!(
            "histogram estimator needs scalar samples, got dims ({}, {})",
            samples.x_dim(),
            samples.y_dim()
        )));
    }
    if bins < 2 {
        return Err(Error::invalid("histogram estimator needs at least 2 bins"));
    }

    let xs: Vec<f64> = samples.pairs().iter().map(|(x, _)| x.as_slice()[0]).collect();
    let ys: Vec<f64> = samples.pairs().iter().map(|(_, y)| y.as_slice()[0]).collect();

    let assign = |values: &[f64]| -> Vec<usize> {
        let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if hi <= lo {
            return vec![0; values.len()];
        }
        let width = (hi - lo) / bins as f64;
        values
            .iter()
            .map(|v| (((v - lo) / width) as usize).min(bins - 1))
            .collect()
    };

    let xb = assign(&xs);
    let yb = assign(&ys);
    let mut counts = vec![0u64; bins * bins];
    for (&i, &j) in xb.iter().zip(&yb) {
        counts[i * bins + j] += 1;
    }
    let n = samples.len() as f64;
    let grid: Vec<Vec<f64>> = (0..bins)
        .map(|i| (0..bins).map(|j| counts[i * bins + j] as f64 / n).collect())
        .collect();
    Ok(mi_exact(&DiscreteJoint::new(grid)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::StreamKey;

    // Independently derived closed forms for the reference cases:
    //   H(0.4,0.4,0.1,0.1) = -2(0.4 ln 0.4) - 2(0.1 ln 0.1)
    //   I for grid [[0.4,0.1],[0.1,0.4]] = sum p ln(p / 0.25)
    const H_REFERENCE: f64 = 1.1935496040981333;
    const MI_REFERENCE: f64 = 0.19274475702175742;

    #[test]
    fn entropy_reference_values() {
        assert!((entropy(&[0.5, 0.5]).unwrap() - std::f64::consts::LN_2).abs() < 1e-12);
        let h8 = entropy(&[0.125; 8]).unwrap();
        assert!((h8 - 8f64.ln()).abs() < 1e-12);
        let h = entropy(&[0.4, 0.4, 0.1, 0.1]).unwrap();
        assert!((h - H_REFERENCE).abs() < 1e-12);
        assert_eq!(entropy(&[1.0, 0.0, 0.0]).unwrap(), 0.0);
    }

    #[test]
    fn entropy_is_permutation_invariant() {
        let a = entropy(&[0.1, 0.2, 0.3, 0.4]).unwrap();
        let b = entropy(&[0.4, 0.1, 0.3, 0.2]).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn entropy_rejects_bad_input() {
        assert!(entropy(&[]).is_err());
        assert!(entropy(&[0.5, 0.4]).is_err());
        assert!(entropy(&[-0.1, 1.1]).is_err());
    }

    #[test]
    fn mi_reference_value() {
        let joint = DiscreteJoint::new(vec![vec![0.4, 0.1], vec![0.1, 0.4]]).unwrap();
        assert!((mi_exact(&joint) - MI_REFERENCE).abs() < 1e-12);
    }

    #[test]
    fn mi_zero_for_product_joint() {
        let p = [0.2, 0.3, 0.5];
        let q = [0.3, 0.35, 0.35];
        let rows = p.iter().map(|pi| q.iter().map(|qj| pi * qj).collect()).collect();
        let joint = DiscreteJoint::new(rows).unwrap();
        assert!(mi_exact(&joint) < 1e-12);
    }

    #[test]
    fn mi_symmetric_under_transpose() {
        let joint =
            DiscreteJoint::new(vec![vec![0.3, 0.05, 0.1], vec![0.02, 0.33, 0.2]]).unwrap();
        let a = mi_exact(&joint);
        let b = mi_exact(&joint.transposed());
        assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn mi_diagonal_equals_entropy() {
        // Y = X exactly, so I(X;Y) = H(X).
        let joint = DiscreteJoint::new(vec![
            vec![0.4, 0.0, 0.0],
            vec![0.0, 0.25, 0.0],
            vec![0.0, 0.0, 0.35],
        ])
        .unwrap();
        let h = entropy(&[0.4, 0.25, 0.35]).unwrap();
        assert!((mi_exact(&joint) - h).abs() < 1e-12);
    }

    #[test]
    fn joint_validation() {
        assert!(DiscreteJoint::new(vec![]).is_err());
        assert!(DiscreteJoint::new(vec![vec![0.5, 0.5], vec![0.5]]).is_err());
        assert!(DiscreteJoint::new(vec![vec![0.7, 0.4]]).is_err());
        assert!(DiscreteJoint::new(vec![vec![1.2, -0.2]]).is_err());
    }

    #[test]
    fn binary_symmetric_extremes() {
        let perfect = DiscreteJoint::binary_symmetric(0.0).unwrap();
        assert!((mi_exact(&perfect) - std::f64::consts::LN_2).abs() < 1e-12);
        let none = DiscreteJoint::binary_symmetric(0.5).unwrap();
        assert!(mi_exact(&none) < 1e-12);
        assert!(DiscreteJoint::binary_symmetric(0.6).is_err());
    }

    #[test]
    fn sampling_matches_cell_frequencies() {
        let joint = DiscreteJoint::new(vec![vec![0.4, 0.1], vec![0.1, 0.4]]).unwrap();
        let mut stream = StreamKey::root(3).child(crate::rng::label::SAMPLE).stream();
        let set = joint.sample(40_000, &mut stream).unwrap();
        let mut counts = [[0u64; 2]; 2];
        for (x, y) in set.pairs() {
            counts[x.as_slice()[0] as usize][y.as_slice()[0] as usize] += 1;
        }
        for x in 0..2 {
            for y in 0..2 {
                let freq = counts[x][y] as f64 / 40_000.0;
                assert!(
                    (freq - joint.prob(x, y)).abs() < 0.01,
                    "cell ({x},{y}): {freq} vs {}",
                    joint.prob(x, y)
                );
            }
        }
    }

    #[test]
    fn histogram_estimator_recovers_discrete_mi() {
        let joint = DiscreteJoint::new(vec![vec![0.4, 0.1], vec![0.1, 0.4]]).unwrap();
        let mut stream = StreamKey::root(17).child(crate::rng::label::SAMPLE).stream();
        let set = joint.sample(50_000, &mut stream).unwrap();
        let est = mi_histogram(&set, 2).unwrap();
        assert!(
            (est - mi_exact(&joint)).abs() < 0.03,
            "estimate {est} vs exact {}",
            mi_exact(&joint)
        );
    }

    #[test]
    fn histogram_estimator_input_checks() {
        let set = SampleSet::new(vec![(
            RealVector::new(vec![0.0, 1.0]).unwrap(),
            RealVector::new(vec![0.0]).unwrap(),
        )])
        .unwrap();
        assert!(matches!(mi_histogram(&set, 4), Err(Error::DimensionMismatch(_))));

        let scalar = SampleSet::new(vec![(
            RealVector::new(vec![0.0]).unwrap(),
            RealVector::new(vec![0.0]).unwrap(),
        )])
        .unwrap();
        assert!(mi_histogram(&scalar, 1).is_err());
    }

    #[test]
    fn sample_set_shape_checks() {
        assert!(SampleSet::new(vec![]).is_err());
        let bad = SampleSet::new(vec![
            (RealVector::new(vec![0.0]).unwrap(), RealVector::new(vec![0.0]).unwrap()),
            (RealVector::new(vec![0.0, 1.0]).unwrap(), RealVector::new(vec![0.0]).unwrap()),
        ]);
        assert!(bad.is_err());
    }

    #[test]
    fn real_vector_rejects_non_finite() {
        assert!(RealVector::new(vec![1.0, f64::NAN]).is_err());
        assert!(RealVector::new(vec![f64::INFINITY]).is_err());
    }

    #[test]
    fn joint_serde_round_trip() {
        let joint = DiscreteJoint::new(vec![vec![0.4, 0.1], vec![0.1, 0.4]]).unwrap();
        let json = serde_json::to_string(&joint).unwrap();
        let back: DiscreteJoint = serde_json::from_str(&json).unwrap();
        assert_eq!(joint, back);
        // An invalid grid must be rejected on the way in.
        let bad: std::result::Result<DiscreteJoint, _> =
            serde_json::from_str("[[0.9,0.3],[0.1,0.1]]");
        assert!(bad.is_err());
    }
}
