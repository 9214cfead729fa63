//! Online threshold adaptation.
//!
//! The router keeps a rolling window of routed outcomes. Each update compares
//! per-strategy accuracy inside the window and nudges the threshold by a
//! fixed step in the direction of whichever strategy is currently winning:
//! when slow outperforms fast the threshold rises, and vice versa. The
//! threshold is clamped to a configured band so routing never saturates
//! irreversibly.
//!
//! Accuracy evidence for a strategy comes from queries actually routed to it,
//! plus shadow (counterfactual) evaluations recorded for the road not taken.

use std::collections::VecDeque;

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

use super::Strategy;

/// Step size, window length and clamp band for threshold adaptation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ThresholdConfig {
    pub initial_tau: f64,
    /// Magnitude of one adaptation step.
    pub alpha: f64,
    /// Number of most recent outcomes considered.
    pub window: usize,
    pub tau_min: f64,
    pub tau_max: f64,
}

impl Default for ThresholdConfig {
    fn default() -> Self {
        ThresholdConfig {
            initial_tau: 0.5,
            alpha: 0.01,
            window: 100,
            tau_min: 0.05,
            tau_max: 0.95,
        }
    }
}

impl ThresholdConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha.is_finite() && self.alpha > 0.0) {
            return Err(Error::invalid("threshold alpha must be positive and finite"));
        }
        if self.window == 0 {
            return Err(Error::invalid("threshold window must be at least 1"));
        }
        let ordered = self.tau_min.is_finite()
            && self.tau_max.is_finite()
            && self.initial_tau.is_finite()
            && self.tau_min <= self.initial_tau
            && self.initial_tau <= self.tau_max;
        if !ordered {
            return Err(Error::invalid(format!(
                "threshold band must satisfy tau_min <= initial_tau <= tau_max, got \
                 [{}, {}] with initial {}",
                self.tau_min, self.tau_max, self.initial_tau
            )));
        }
        Ok(())
    }
}

/// One routed query's outcome, as fed back into adaptation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutcomeRecord {
    /// Strategy the query was actually routed to.
    pub strategy: Strategy,
    pub correct: bool,
    /// Whether the *other* strategy answered correctly, when a shadow
    /// evaluation ran for this query.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub counterfactual_correct: Option<bool>,
}

/// Current threshold plus the rolling outcome window behind it.
#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdState {
    config: ThresholdConfig,
    tau: f64,
    window: VecDeque<OutcomeRecord>,
}

impl ThresholdState {
    pub fn new(config: ThresholdConfig) -> Result<Self> {
        config.validate()?;
        let tau = config.initial_tau;
        let capacity = config.window;
        Ok(ThresholdState { config, tau, window: VecDeque::with_capacity(capacity) })
    }

    pub fn config(&self) -> &ThresholdConfig {
        &self.config
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn window_len(&self) -> usize {
        self.window.len()
    }

    /// Outcomes currently in the window, oldest first.
    pub fn window(&self) -> impl ExactSizeIterator<Item = &OutcomeRecord> {
        self.window.iter()
    }

    /// Push an outcome, evicting the oldest once the window is full.
    pub fn record_outcome(&mut self, outcome: OutcomeRecord) {
        if self.window.len() == self.config.window {
            self.window.pop_front();
        }
        self.window.push_back(outcome);
    }

    /// One adaptation step. Returns the new threshold.
    ///
    /// Needs at least one piece of accuracy evidence for each strategy
    /// (routed or counterfactual) inside the window; otherwise fails with
    /// [`Error::InsufficientEvidence`] and leaves the threshold untouched.
    /// Exactly tied accuracies leave the threshold unchanged.
    pub fn update_threshold(&mut self) -> Result<f64> {
        let mut fast = Tally::default();
        let mut slow = Tally::default();
        for record in &self.window {
            match record.strategy {
                Strategy::Fast => {
                    fast.add(record.correct);
                    if let Some(cf) = record.counterfactual_correct {
                        slow.add(cf);
                    }
                }
                Strategy::Slow => {
                    slow.add(record.correct);
                    if let Some(cf) = record.counterfactual_correct {
                        fast.add(cf);
                    }
                }
            }
        }
        if fast.total == 0 || slow.total == 0 {
            return Err(Error::InsufficientEvidence(format!(
                "window holds {} fast and {} slow observations; need both",
                fast.total, slow.total
            )));
        }
        let diff = slow.accuracy() - fast.accuracy();
        let step = if diff > 0.0 {
            self.config.alpha
        } else if diff < 0.0 {
            -self.config.alpha
        } else {
            0.0
        };
        self.tau = (self.tau + step).clamp(self.config.tau_min, self.config.tau_max);
        Ok(self.tau)
    }
}

#[derive(Default)]
struct Tally {
    hits: u64,
    total: u64,
}

impl Tally {
    fn add(&mut self, correct: bool) {
        self.hits += u64::from(correct);
        self.total += 1;
    }

    fn accuracy(&self) -> f64 {
        self.hits as f64 / self.total as f64
    }
}
