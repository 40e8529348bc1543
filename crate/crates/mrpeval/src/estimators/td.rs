//! k-step temporal-difference estimation over a streaming sample path.
//!
//! The estimate of the state observed at step `t` is moved toward the
//! k-step bootstrapped return
//! `γ⁰R_t + ... + γᵏR_{t+k} + γ^{k+1} v̂(X_{t+k+1})`
//! with step size `η = 1 / (visit count of X_t)^d`, where the visit count
//! includes the current visit. All estimates start at 0.
//!
//! Updates are only issued for windows that lie entirely inside the
//! observed stream: the last `k + 1` steps of a path anchor no update.

use std::collections::VecDeque;

/// Streaming TD(k) estimator over all states of a chain.
#[derive(Debug, Clone)]
pub struct TdEstimator {
    gamma: f64,
    k: usize,
    d: f64,
    estimates: Vec<f64>,
    visit_counts: Vec<u64>,
    /// The last up-to-`k + 2` observed `(state, reward)` pairs; once full,
    /// the front entry has a complete window and is consumed.
    pending: VecDeque<(usize, f64)>,
}

impl TdEstimator {
    /// `k` is the lookahead depth and `d ∈ [1/2, 1]` the learning-rate
    /// exponent.
    pub fn new(num_states: usize, k: usize, d: f64, gamma: f64) -> Self {
        assert!(num_states >= 1, "need at least one state");
        assert!((0.5..=1.0).contains(&d), "d must lie in [1/2, 1]");
        assert!((0.0..1.0).contains(&gamma), "gamma must lie in [0, 1)");
        TdEstimator {
            gamma,
            k,
            d,
            estimates: vec![0.0; num_states],
            visit_counts: vec![0; num_states],
            pending: VecDeque::with_capacity(k + 2),
        }
    }

    /// Feeds one step `(X_t, R_t)` of the sample path, issuing the update
    /// for the step observed `k + 1` steps ago if its window is now
    /// complete.
    pub fn observe(&mut self, state: usize, reward: f64) {
        self.pending.push_back((state, reward));
        if self.pending.len() == self.k + 2 {
            self.apply_front_update();
            self.pending.pop_front();
        }
    }

    fn apply_front_update(&mut self) {
        let (anchor, _) = self.pending[0];
        self.visit_counts[anchor] += 1;
        let eta = 1.0 / (self.visit_counts[anchor] as f64).powf(self.d);

        let mut target = 0.0;
        let mut discount = 1.0;
        for i in 0..=self.k {
            target += discount * self.pending[i].1;
            discount *= self.gamma;
        }
        let bootstrap_state = self.pending[self.k + 1].0;
        target += discount * self.estimates[bootstrap_state];

        self.estimates[anchor] += eta * (target - self.estimates[anchor]);
    }

    /// Current value estimates for all states (unvisited states stay at
    /// their initialization, 0).
    pub fn estimates(&self) -> &[f64] {
        &self.estimates
    }

    pub fn estimate(&self, state: usize) -> f64 {
        self.estimates[state]
    }

    /// How many updates each state has anchored so far.
    pub fn visit_counts(&self) -> &[u64] {
        &self.visit_counts
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn d(&self) -> f64 {
        self.d
    }
}
