//! Cross-checks single-linkage clustering against a graph oracle.
//!
//! Merging the closest pair while its gap is at most `merge_distance` yields
//! exactly the connected components of the graph whose edges join points
//! within `merge_distance` of each other. The oracle computes those
//! components directly (union-find over all pairs), applies the same
//! dissolve rule for undersized groups, and numbers clusters the same way:
//! by earliest member.

use cdr_core::features::cluster_concepts;
use cdr_core::numeric::RealVector;
use cdr_core::rng::{label, StreamKey};
use cdr_core::ClusteringConfig;

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind((0..n).collect())
    }

    fn find(&mut self, i: usize) -> usize {
        if self.0[i] != i {
            let root = self.find(self.0[i]);
            self.0[i] = root;
        }
        self.0[i]
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.0[ra.max(rb)] = ra.min(rb);
        }
    }
}

fn oracle_labels(points: &[RealVector], config: &ClusteringConfig) -> Vec<usize> {
    let n = points.len();
    let mut uf = UnionFind::new(n);
    for i in 0..n {
        for j in (i + 1)..n {
            if points[i].distance(&points[j]).unwrap() <= config.merge_distance {
                uf.union(i, j);
            }
        }
    }

    let mut by_root: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
    for i in 0..n {
        let root = uf.find(i);
        by_root.entry(root).or_default().push(i);
    }
    let groups: Vec<Vec<usize>> = by_root.into_values().collect();

    let mut final_groups: Vec<Vec<usize>> = Vec::new();
    for group in groups {
        if group.len() < config.min_cluster_size {
            for member in group {
                final_groups.push(vec![member]);
            }
        } else {
            final_groups.push(group);
        }
    }
    final_groups.sort_by_key(|g| g[0]);

    let mut labels = vec![0usize; n];
    for (id, group) in final_groups.iter().enumerate() {
        for &member in group {
            labels[member] = id;
        }
    }
    labels
}

fn random_points(seed: u64, n: usize, dim: usize, spread: f64) -> Vec<RealVector> {
    let mut stream = StreamKey::root(seed).child(label::SAMPLE).stream();
    (0..n)
        .map(|_| {
            let coords = (0..dim).map(|_| stream.next_f64() * spread).collect();
            RealVector::new(coords).unwrap()
        })
        .collect()
}

#[test]
fn agglomerative_matches_component_oracle_on_random_points() {
    for seed in 0..30u64 {
        // Spread controls edge density: small spreads force many merges,
        // large spreads mostly singletons.
        let n = 2 + (seed as usize * 7) % 40;
        let dim = 1 + (seed as usize) % 4;
        let spread = [0.4, 1.0, 3.0][seed as usize % 3];
        let config = ClusteringConfig {
            min_cluster_size: 1 + (seed as usize) % 3,
            merge_distance: 0.5,
        };
        let points = random_points(seed, n, dim, spread);

        let fitted = cluster_concepts(&points, &config).unwrap();
        let expected = oracle_labels(&points, &config);
        assert_eq!(
            fitted.labels(),
            expected.as_slice(),
            "seed {seed}: n={n} dim={dim} spread={spread} min_size={}",
            config.min_cluster_size
        );
        assert_eq!(
            fitted.cluster_count(),
            expected.iter().max().unwrap() + 1,
            "cluster count disagrees with label range (seed {seed})"
        );
    }
}

#[test]
fn merge_distance_boundary_is_inclusive() {
    // Two points exactly merge_distance apart must join.
    let points = vec![
        RealVector::new(vec![0.0]).unwrap(),
        RealVector::new(vec![0.5]).unwrap(),
    ];
    let config = ClusteringConfig { min_cluster_size: 1, merge_distance: 0.5 };
    let fitted = cluster_concepts(&points, &config).unwrap();
    assert_eq!(fitted.labels(), &[0, 0]);
    assert_eq!(oracle_labels(&points, &config), vec![0, 0]);
}

#[test]
fn duplicate_points_share_a_cluster() {
    let p = RealVector::new(vec![1.0, 2.0]).unwrap();
    let points = vec![p.clone(), p.clone(), p];
    let config = ClusteringConfig::default();
    let fitted = cluster_concepts(&points, &config).unwrap();
    assert_eq!(fitted.labels(), &[0, 0, 0]);
    assert_eq!(oracle_labels(&points, &config), vec![0, 0, 0]);
}

#[test]
fn dissolution_can_raise_the_cluster_count_above_component_count() {
    // One tight pair plus one distant singleton, min size 3: everything
    // dissolves, so three clusters from two components.
    let points = vec![
        RealVector::new(vec![0.0]).unwrap(),
        RealVector::new(vec![0.1]).unwrap(),
        RealVector::new(vec![9.0]).unwrap(),
    ];
    let config = ClusteringConfig { min_cluster_size: 3, merge_distance: 0.5 };
    let fitted = cluster_concepts(&points, &config).unwrap();
    assert_eq!(fitted.labels(), &[0, 1, 2]);
    assert_eq!(fitted.cluster_count(), 3);
    assert_eq!(oracle_labels(&points, &config), vec![0, 1, 2]);
}
