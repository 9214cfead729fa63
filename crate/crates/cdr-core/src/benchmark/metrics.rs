//! Evaluation metrics: answer consistency, calibration error, routing
//! confusion, and paired bootstrap confidence intervals.

use std::collections::BTreeMap;

use crate::engines::TaskCategory;
use crate::error::{Error, Result};
use crate::rng::StreamKey;
use crate::routing::Strategy;
use serde::{Deserialize, Serialize};

/// Compensated summation; keeps long accumulations order-stable in practice.
#[derive(Debug, Default, Clone, Copy)]
pub struct KahanSum {
    sum: f64,
    carry: f64,
}

impl KahanSum {
    pub fn add(&mut self, value: f64) {
        let y = value - self.carry;
        let t = self.sum + y;
        self.carry = (t - self.sum) - y;
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum
    }
}

/// Aggregate outcome statistics for one baseline over a full run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunMetrics {
    pub accuracy: f64,
    pub consistency: f64,
    pub mean_tokens: f64,
    pub mean_latency_s: f64,
    pub ece: f64,
    /// Fraction of query executions resolved by the fast strategy alone.
    pub fast_fraction: f64,
}

/// Mean pairwise answer agreement.
///
/// `answers[q]` holds one answer id per repeat for query `q`. For each query
/// the agreeing pairs are counted exactly — `sum_a C(c_a, 2) / C(R, 2)` over
/// the answer multiset — and the final score is the mean over queries. Needs
/// at least two repeats.
pub fn consistency(answers: &[Vec<u32>]) -> Result<f64> {
    if answers.is_empty() {
        return Err(Error::invalid("consistency needs at least one query"));
    }
    let repeats = answers[0].len();
    if repeats < 2 {
        return Err(Error::invalid("consistency needs at least two repeats per query"));
    }
    if answers.iter().any(|a| a.len() != repeats) {
        return Err(Error::dims("queries disagree on repeat count"));
    }
    let total_pairs = (repeats * (repeats - 1) / 2) as f64;
    let mut acc = KahanSum::default();
    let mut counts: BTreeMap<u32, u64> = BTreeMap::new();
    for per_query in answers {
        counts.clear();
        for &answer in per_query {
            *counts.entry(answer).or_insert(0) += 1;
        }
        let agreeing: u64 = counts.values().map(|&c| c * (c - 1) / 2).sum();
        acc.add(agreeing as f64 / total_pairs);
    }
    Ok(acc.value() / answers.len() as f64)
}

/// Expected calibration error over `bins` equal-width confidence bins.
///
/// `sum_b (n_b / n) * |accuracy_b - mean_confidence_b|`; empty bins
/// contribute nothing. Confidences must lie in [0, 1].
pub fn calibration_ece(confidences: &[f64], correct: &[bool], bins: usize) -> Result<f64> {
    if confidences.is_empty() {
        return Err(Error::invalid("calibration error needs at least one sample"));
    }
    if confidences.len() != correct.len() {
        return Err(Error::dims(format!(
            "{} confidences vs {} outcomes",
            confidences.len(),
            correct.len()
        )));
    }
    if bins == 0 {
        return Err(Error::invalid("calibration error needs at least one bin"));
    }
    if confidences.iter().any(|c| !(0.0..=1.0).contains(c)) {
        return Err(Error::invalid("confidences must lie in [0, 1]"));
    }

    let mut bin_n = vec![0u64; bins];
    let mut bin_conf = vec![KahanSum::default(); bins];
    let mut bin_hits = vec![0u64; bins];
    for (&c, &ok) in confidences.iter().zip(correct) {
        let b = ((c * bins as f64) as usize).min(bins - 1);
        bin_n[b] += 1;
        bin_conf[b].add(c);
        bin_hits[b] += u64::from(ok);
    }
    let n = confidences.len() as f64;
    let mut ece = 0.0;
    for b in 0..bins {
        if bin_n[b] == 0 {
            continue;
        }
        let count = bin_n[b] as f64;
        let acc = bin_hits[b] as f64 / count;
        let conf = bin_conf[b].value() / count;
        ece += (count / n) * (acc - conf).abs();
    }
    Ok(ece)
}

/// Per-category slice of a routing confusion report.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConfusionCell {
    pub count: u64,
    pub routing_accuracy: f64,
    /// Routed slow when the oracle said fast (paid for unneeded deliberation).
    pub false_positive_rate: f64,
    /// Routed fast when the oracle said slow (missed needed deliberation).
    pub false_negative_rate: f64,
}

/// Agreement between routed strategies and oracle labels.
///
/// The three rates partition the decisions, so they sum to exactly 1 (the
/// false-negative rate is computed as the complement).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfusionReport {
    pub count: u64,
    pub routing_accuracy: f64,
    pub false_positive_rate: f64,
    pub false_negative_rate: f64,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub per_category: BTreeMap<TaskCategory, ConfusionCell>,
}

fn cell(matches: u64, false_pos: u64, false_neg: u64) -> ConfusionCell {
    let count = matches + false_pos + false_neg;
    let routing_accuracy = matches as f64 / count as f64;
    let false_positive_rate = false_pos as f64 / count as f64;
    debug_assert_eq!(matches + false_pos + false_neg, count);
    ConfusionCell {
        count,
        routing_accuracy,
        false_positive_rate,
        // Complement of the *rounded* sum, so adding the three rates left to
        // right lands on exactly 1.0 (1 - a - b can leave a one-ulp residue).
        false_negative_rate: 1.0 - (routing_accuracy + false_positive_rate),
    }
}

/// Compare routed strategies against oracle labels, optionally sliced by
/// task category (`categories`, when given, must align with `decided`).
pub fn routing_confusion(
    decided: &[Strategy],
    oracle: &[Strategy],
    categories: Option<&[TaskCategory]>,
) -> Result<ConfusionReport> {
    if decided.is_empty() {
        return Err(Error::invalid("confusion report needs at least one decision"));
    }
    if decided.len() != oracle.len() {
        return Err(Error::dims(format!(
            "{} decisions vs {} oracle labels",
            decided.len(),
            oracle.len()
        )));
    }
    if let Some(cats) = categories {
        if cats.len() != decided.len() {
            return Err(Error::dims(format!(
                "{} categories vs {} decisions",
                cats.len(),
                decided.len()
            )));
        }
    }

    let mut totals = (0u64, 0u64, 0u64);
    let mut by_cat: BTreeMap<TaskCategory, (u64, u64, u64)> = BTreeMap::new();
    for (i, (&d, &o)) in decided.iter().zip(oracle).enumerate() {
        let slot = match (d, o) {
            (d, o) if d == o => 0,
            (Strategy::Slow, Strategy::Fast) => 1,
            _ => 2,
        };
        let bump = |t: &mut (u64, u64, u64)| match slot {
            0 => t.0 += 1,
            1 => t.1 += 1,
            _ => t.2 += 1,
        };
        bump(&mut totals);
        if let Some(cats) = categories {
            bump(by_cat.entry(cats[i]).or_insert((0, 0, 0)));
        }
    }

    let overall = cell(totals.0, totals.1, totals.2);
    Ok(ConfusionReport {
        count: overall.count,
        routing_accuracy: overall.routing_accuracy,
        false_positive_rate: overall.false_positive_rate,
        false_negative_rate: overall.false_negative_rate,
        per_category: by_cat
            .into_iter()
            .map(|(cat, (m, fp, fneg))| (cat, cell(m, fp, fneg)))
            .collect(),
    })
}

/// Mean paired difference with a percentile bootstrap confidence interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BootstrapCi {
    pub mean: f64,
    pub lo: f64,
    pub hi: f64,
}

impl BootstrapCi {
    /// True when the interval lies strictly on one side of zero.
    pub fn excludes_zero(&self) -> bool {
        self.lo > 0.0 || self.hi < 0.0
    }
}

/// Paired bootstrap over per-query differences `a[i] - b[i]`.
///
/// Resamples queries with replacement `resamples` times and reports the 2.5th
/// and 97.5th percentiles (nearest-rank) of the resampled mean difference.
/// Deterministic given `key`.
pub fn paired_bootstrap_ci(
    a: &[f64],
    b: &[f64],
    resamples: usize,
    key: StreamKey,
) -> Result<BootstrapCi> {
    if a.is_empty() {
        return Err(Error::invalid("bootstrap needs at least one paired observation"));
    }
    if a.len() != b.len() {
        return Err(Error::dims(format!("{} vs {} paired observations", a.len(), b.len())));
    }
    if resamples < 40 {
        return Err(Error::invalid(
            "need at least 40 resamples for 95% percentile endpoints",
        ));
    }

    let n = a.len();
    let diffs: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let mut acc = KahanSum::default();
    for &d in &diffs {
        acc.add(d);
    }
    let mean = acc.value() / n as f64;

    let mut stream = key.stream();
    let mut means = Vec::with_capacity(resamples);
    for _ in 0..resamples {
        let mut s = KahanSum::default();
        for _ in 0..n {
            s.add(diffs[stream.below(n as u64) as usize]);
        }
        means.push(s.value() / n as f64);
    }
    means.sort_by(|x, y| x.partial_cmp(y).expect("finite means"));
    let lo_idx = ((resamples as f64) * 0.025).floor() as usize;
    let hi_idx = (((resamples as f64) * 0.975).ceil() as usize).saturating_sub(1);
    Ok(BootstrapCi { mean, lo: means[lo_idx], hi: means[hi_idx.min(resamples - 1)] })
}
