//! Cross-checks the greedy tree fitter against an independent reference
//! implementation.
//!
//! The reference grows the tree the slow, obvious way: at every node it
//! enumerates each feature's midpoints between consecutive distinct values,
//! counts both sides by a full scan, and compares split quality as exact
//! integer rationals (the same ordering the fitter commits to, with ties
//! preferring the lowest feature and then the smallest threshold). Because
//! candidate thresholds and quality ordering are both exactly defined, the
//! two implementations must agree on every training decision bit for bit.

use cdr_core::routing::{fit_tree, Strategy, TreeNode};
use cdr_core::rng::{label, StreamKey};
use cdr_core::FeatureVector;

enum RefTree {
    Leaf {
        slow: u64,
        total: u64,
    },
    Split {
        feature: usize,
        threshold: f64,
        left: Box<RefTree>,
        right: Box<RefTree>,
    },
}

impl RefTree {
    fn score(&self, x: &[f64; 4]) -> f64 {
        match self {
            RefTree::Leaf { slow, total } => *slow as f64 / *total as f64,
            RefTree::Split { feature, threshold, left, right } => {
                if x[*feature] < *threshold {
                    left.score(x)
                } else {
                    right.score(x)
                }
            }
        }
    }
}

/// `a` is a strictly better (lower) impurity than `b`, compared exactly.
fn strictly_better(a: (u128, u128), b: (u128, u128)) -> bool {
    a.0 * b.1 < b.0 * a.1
}

fn split_counts(
    data: &[(FeatureVector, Strategy)],
    members: &[usize],
    feature: usize,
    threshold: f64,
) -> (u64, u64, u64, u64) {
    let (mut left_n, mut left_slow, mut right_n, mut right_slow) = (0, 0, 0, 0);
    for &i in members {
        let slow = data[i].1 == Strategy::Slow;
        if data[i].0.as_array()[feature] < threshold {
            left_n += 1;
            left_slow += u64::from(slow);
        } else {
            right_n += 1;
            right_slow += u64::from(slow);
        }
    }
    (left_n, left_slow, right_n, right_slow)
}

fn grow_reference(
    data: &[(FeatureVector, Strategy)],
    members: &[usize],
    depth: usize,
    max_depth: usize,
) -> RefTree {
    let total = members.len() as u64;
    let slow = members.iter().filter(|&&i| data[i].1 == Strategy::Slow).count() as u64;
    if slow == 0 || slow == total || depth == max_depth {
        return RefTree::Leaf { slow, total };
    }

    let mut best: Option<(usize, f64, (u128, u128))> = None;
    for feature in 0..4 {
        let mut values: Vec<f64> = members
            .iter()
            .map(|&i| data[i].0.as_array()[feature])
            .collect();
        values.sort_by(f64::total_cmp);
        values.dedup();
        for pair in values.windows(2) {
            let threshold = pair[0] + (pair[1] - pair[0]) / 2.0;
            if threshold <= pair[0] {
                continue;
            }
            let (ln, ls, rn, rs) = split_counts(data, members, feature, threshold);
            assert!(ln > 0 && rn > 0, "midpoint must separate its endpoints");
            let quality = (
                (ln - ls) as u128 * ls as u128 * rn as u128
                    + (rn - rs) as u128 * rs as u128 * ln as u128,
                ln as u128 * rn as u128,
            );
            if best.map_or(true, |(_, _, incumbent)| strictly_better(quality, incumbent)) {
                best = Some((feature, threshold, quality));
            }
        }
    }

    match best {
        None => RefTree::Leaf { slow, total },
        Some((feature, threshold, _)) => {
            let left: Vec<usize> = members
                .iter()
                .copied()
                .filter(|&i| data[i].0.as_array()[feature] < threshold)
                .collect();
            let right: Vec<usize> = members
                .iter()
                .copied()
                .filter(|&i| data[i].0.as_array()[feature] >= threshold)
                .collect();
            RefTree::Split {
                feature,
                threshold,
                left: Box::new(grow_reference(data, &left, depth + 1, max_depth)),
                right: Box::new(grow_reference(data, &right, depth + 1, max_depth)),
            }
        }
    }
}

fn assert_same_structure(fitted: &TreeNode, reference: &RefTree, path: &str) {
    match (fitted, reference) {
        (TreeNode::Leaf { score }, RefTree::Leaf { slow, total }) => {
            assert_eq!(
                *score,
                *slow as f64 / *total as f64,
                "leaf score at {path} ({slow}/{total})"
            );
        }
        (
            TreeNode::Split { feature, threshold, left, right },
            RefTree::Split {
                feature: ref_feature,
                threshold: ref_threshold,
                left: ref_left,
                right: ref_right,
            },
        ) => {
            assert_eq!(feature, ref_feature, "split feature at {path}");
            assert_eq!(threshold, ref_threshold, "split threshold at {path}");
            assert_same_structure(left, ref_left, &format!("{path}L"));
            assert_same_structure(right, ref_right, &format!("{path}R"));
        }
        (TreeNode::Leaf { .. }, RefTree::Split { feature, .. }) => {
            panic!("fitted leaf where reference splits on feature {feature} at {path}")
        }
        (TreeNode::Split { feature, .. }, RefTree::Leaf { .. }) => {
            panic!("fitted splits on feature {feature} where reference has a leaf at {path}")
        }
    }
}

/// Random labeled data sets. Values are drawn from coarse grids about half
/// the time so duplicate feature values (and therefore candidate-threshold
/// ties) are common, which is where implementations usually drift apart.
fn random_dataset(seed: u64, n: usize) -> Vec<(FeatureVector, Strategy)> {
    let key = StreamKey::root(seed).child(label::SAMPLE);
    let mut values = key.child(0).stream();
    let mut labels = key.child(1).stream();
    let mut shape = key.child(2).stream();

    let grids: [u64; 4] = std::array::from_fn(|_| 1 + shape.below(6));
    let label_rule = shape.below(3);

    (0..n)
        .map(|_| {
            let mut x = [0.0f64; 4];
            for (j, slot) in x.iter_mut().enumerate() {
                *slot = if grids[j] == 1 {
                    values.next_f64()
                } else {
                    values.below(grids[j]) as f64 / (grids[j] - 1).max(1) as f64
                };
            }
            let slow = match label_rule {
                0 => labels.next_f64() < 0.5,
                1 => x[0] + x[3] + 0.3 * labels.next_f64() > 1.0,
                _ => (x[1] > 0.5) != (x[2] > 0.5) || labels.next_f64() < 0.1,
            };
            (
                FeatureVector::new(x[0], x[1], x[2], x[3]).unwrap(),
                if slow { Strategy::Slow } else { Strategy::Fast },
            )
        })
        .collect()
}

#[test]
fn greedy_fitter_matches_reference_on_random_data() {
    for seed in 0..24u64 {
        let n = [2, 3, 7, 20, 40, 75, 120, 200][seed as usize % 8];
        let max_depth = 1 + (seed % 3) as usize; // 1..=3
        let data = random_dataset(seed, n);
        let fitted = fit_tree(&data, max_depth).unwrap();
        let reference = grow_reference(&data, &(0..n).collect::<Vec<_>>(), 0, max_depth);

        assert_same_structure(fitted.root(), &reference, "·");
        for (f, _) in &data {
            assert_eq!(
                fitted.score(f),
                reference.score(&f.as_array()),
                "training-point score for {:?} (seed {seed})",
                f.as_array()
            );
        }
    }
}

#[test]
fn reference_agrees_on_constant_features() {
    // Impure data with nothing to split on: both sides must emit the same
    // mixed leaf.
    let f = FeatureVector::new(0.5, 0.5, 0.5, 0.5).unwrap();
    let data = vec![
        (f, Strategy::Fast),
        (f, Strategy::Slow),
        (f, Strategy::Slow),
    ];
    let fitted = fit_tree(&data, 3).unwrap();
    let reference = grow_reference(&data, &[0, 1, 2], 0, 3);
    assert_same_structure(fitted.root(), &reference, "·");
    assert_eq!(fitted.score(&f), 2.0 / 3.0);
}

#[test]
fn reference_agrees_on_adjacent_float_values() {
    // Consecutive representable floats: the midpoint collapses onto the left
    // value and the candidate must be skipped by both implementations.
    let lo = 0.3f64;
    let hi = f64::from_bits(lo.to_bits() + 1);
    let mk = |v: f64, s| (FeatureVector::new(v, 0.0, 0.0, 0.0).unwrap(), s);
    let data = vec![
        mk(lo, Strategy::Fast),
        mk(hi, Strategy::Slow),
        mk(0.9, Strategy::Slow),
    ];
    let fitted = fit_tree(&data, 2).unwrap();
    let reference = grow_reference(&data, &[0, 1, 2], 0, 2);
    assert_same_structure(fitted.root(), &reference, "·");
}
