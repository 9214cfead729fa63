//! Estimator accuracy at evaluation scale.
//!
//! The histogram estimator is checked against exact mutual information on a
//! discrete joint it can represent without binning error; the critic
//! estimator is checked against the Gaussian closed form
//! `I = -0.5 ln(1 - rho^2)` and against its one-sided (lower-bound) nature.

use cdr_core::numeric::{
    mi_critic, mi_exact, mi_histogram, CriticConfig, DiscreteJoint, RealVector, SampleSet,
};
use cdr_core::rng::{label, StreamKey};

/// Draw `(x, y)` pairs from a discrete joint, encoded as scalar cell indices.
fn sample_discrete(joint: &DiscreteJoint, n: usize, seed: u64) -> SampleSet {
    let mut cells = Vec::new();
    let mut cumulative = Vec::new();
    let mut acc = 0.0;
    for x in 0..joint.rows() {
        for y in 0..joint.cols() {
            acc += joint.prob(x, y);
            cells.push((x as f64, y as f64));
            cumulative.push(acc);
        }
    }
    let mut stream = StreamKey::root(seed).child(label::SAMPLE).stream();
    let pairs = (0..n)
        .map(|_| {
            let u = stream.next_f64();
            let k = cumulative.iter().position(|&c| u < c).unwrap_or(cells.len() - 1);
            (
                RealVector::new(vec![cells[k].0]).unwrap(),
                RealVector::new(vec![cells[k].1]).unwrap(),
            )
        })
        .collect();
    SampleSet::new(pairs).unwrap()
}

/// Bivariate normal pairs with the given correlation.
fn gaussian_pairs(n: usize, rho: f64, seed: u64) -> SampleSet {
    let mut stream = StreamKey::root(seed).child(label::SAMPLE).stream();
    let scale = (1.0 - rho * rho).sqrt();
    let pairs = (0..n)
        .map(|_| {
            let x = stream.next_normal();
            let y = rho * x + scale * stream.next_normal();
            (RealVector::new(vec![x]).unwrap(), RealVector::new(vec![y]).unwrap())
        })
        .collect();
    SampleSet::new(pairs).unwrap()
}

fn reference_joint() -> DiscreteJoint {
    DiscreteJoint::new(vec![vec![0.4, 0.1], vec![0.1, 0.4]]).unwrap()
}

#[test]
fn histogram_recovers_discrete_joint_at_50k() {
    let joint = reference_joint();
    let truth = mi_exact(&joint);
    let samples = sample_discrete(&joint, 50_000, 501);
    let est = mi_histogram(&samples, 2).unwrap();
    assert!(
        (est - truth).abs() < 0.03,
        "histogram {est} vs exact {truth}: off by {}",
        (est - truth).abs()
    );
}

#[test]
fn histogram_is_bin_count_invariant_on_binary_data() {
    // Values live at 0 and 1 only, so any bin count >= 2 induces the same
    // empirical joint and therefore the identical estimate.
    let samples = sample_discrete(&reference_joint(), 5_000, 502);
    let base = mi_histogram(&samples, 2).unwrap();
    for bins in [3, 4, 8, 16] {
        assert_eq!(mi_histogram(&samples, bins).unwrap(), base, "bins = {bins}");
    }
}

#[test]
fn histogram_near_zero_for_independent_gaussians() {
    let samples = gaussian_pairs(50_000, 0.0, 503);
    let est = mi_histogram(&samples, 16).unwrap();
    // Binning bias for b^2 cells is roughly (b-1)^2 / (2n) ~ 0.002 nats.
    assert!(est.abs() < 0.01, "independent estimate {est}");
}

#[test]
fn critic_matches_gaussian_closed_form_at_10k() {
    let rho: f64 = 0.9;
    let truth = -0.5 * (1.0 - rho * rho).ln();
    let samples = gaussian_pairs(10_000, rho, 504);
    let est = mi_critic(&samples, &CriticConfig::default()).unwrap();
    let rel = (est - truth).abs() / truth;
    assert!(rel < 0.15, "critic {est} vs {truth}: relative error {rel:.4}");
}

#[test]
fn critic_estimates_stay_below_truth_on_average() {
    // The variational objective is a lower bound in expectation. Any single
    // run can overshoot through optimization noise, so test the mean across
    // seeds against truth plus three standard errors.
    let rho: f64 = 0.8;
    let truth = -0.5 * (1.0 - rho * rho).ln();
    let estimates: Vec<f64> = (0..20)
        .map(|seed| {
            let samples = gaussian_pairs(2_000, rho, 600 + seed);
            mi_critic(&samples, &CriticConfig::default()).unwrap()
        })
        .collect();
    let n = estimates.len() as f64;
    let mean = estimates.iter().sum::<f64>() / n;
    let var = estimates.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / (n - 1.0);
    let sem = (var / n).sqrt();
    assert!(
        mean <= truth + 3.0 * sem,
        "mean estimate {mean:.4} exceeds truth {truth:.4} + 3 sem ({sem:.4})"
    );
    // And it should not collapse: the critic must capture most of the signal.
    assert!(mean > 0.5 * truth, "mean estimate {mean:.4} far below truth {truth:.4}");
}

#[test]
fn estimators_agree_with_each_other_on_shared_data() {
    // Same discrete source, both estimators: they see the same information.
    let joint = reference_joint();
    let samples = sample_discrete(&joint, 10_000, 505);
    let hist = mi_histogram(&samples, 2).unwrap();
    let critic = mi_critic(&samples, &CriticConfig::default()).unwrap();
    assert!(
        (hist - critic).abs() < 0.05,
        "histogram {hist} vs critic {critic} on identical samples"
    );
}
