//! Add-1 smoothed model-based value estimation.
//!
//! Sufficient statistics are transition counts, visit counts, and reward
//! sums. The smoothed transition estimate out of state `s` is
//! `P̂[s][s'] = (1/S + count[s][s']) / (1 + Σ_{s''} count[s][s''])`,
//! which is row-stochastic by construction (an unobserved row is the
//! uniform distribution), and the smoothed mean reward is
//! `r̄̂[s] = reward_sum[s] / (1 + visits[s])`. Values come from solving
//! `(I - γ P̂) v̂ = r̄̂`, which the smoothing keeps well-posed for any data.

use crate::linalg;
use crate::mrp::ValueVector;

/// Streaming sufficient statistics for the model-based estimator.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelBasedEstimator {
    transition_counts: Vec<Vec<u64>>,
    visit_counts: Vec<u64>,
    reward_sums: Vec<f64>,
}

impl ModelBasedEstimator {
    pub fn new(num_states: usize) -> Self {
        assert!(num_states >= 1, "need at least one state");
        ModelBasedEstimator {
            transition_counts: vec![vec![0; num_states]; num_states],
            visit_counts: vec![0; num_states],
            reward_sums: vec![0.0; num_states],
        }
    }

    /// Records one observed step `(X_t, R_t, X_{t+1})`.
    pub fn observe_transition(&mut self, state: usize, reward: f64, next_state: usize) {
        self.transition_counts[state][next_state] += 1;
        self.visit_counts[state] += 1;
        self.reward_sums[state] += reward;
    }

    /// Records the final step `(X_{T-1}, R_{T-1})` of a path, which has no
    /// outgoing transition. Its visit and reward still enter the smoothed
    /// mean-reward estimate, leaving that state's transition row one count
    /// short of its visit count.
    pub fn observe_final(&mut self, state: usize, reward: f64) {
        self.visit_counts[state] += 1;
        self.reward_sums[state] += reward;
    }

    /// The add-1 smoothed transition matrix estimate.
    pub fn estimated_transitions(&self) -> Vec<Vec<f64>> {
        let s = self.visit_counts.len();
        let prior = 1.0 / s as f64;
        self.transition_counts
            .iter()
            .map(|row| {
                let outgoing: u64 = row.iter().sum();
                let denom = 1.0 + outgoing as f64;
                row.iter().map(|&c| (prior + c as f64) / denom).collect()
            })
            .collect()
    }

    /// The smoothed mean-reward estimate.
    pub fn estimated_mean_rewards(&self) -> Vec<f64> {
        self.reward_sums
            .iter()
            .zip(&self.visit_counts)
            .map(|(&sum, &visits)| sum / (1.0 + visits as f64))
            .collect()
    }

    /// Solves the Bellman equation for the smoothed model.
    pub fn estimate(&self, gamma: f64) -> ValueVector {
        assert!((0.0..1.0).contains(&gamma), "gamma must lie in [0, 1)");
        let s = self.visit_counts.len();
        let p_hat = self.estimated_transitions();
        let mut a = vec![vec![0.0; s]; s];
        for (i, row) in p_hat.iter().enumerate() {
            for (j, &p) in row.iter().enumerate() {
                let id = if i == j { 1.0 } else { 0.0 };
                a[i][j] = id - gamma * p;
            }
        }
        let values = linalg::solve(a, self.estimated_mean_rewards())
            .expect("I - gamma * P_hat is nonsingular for gamma < 1");
        ValueVector { values, gamma }
    }

    pub fn transition_counts(&self) -> &[Vec<u64>] {
        &self.transition_counts
    }

    pub fn visit_counts(&self) -> &[u64] {
        &self.visit_counts
    }

    pub fn reward_sums(&self) -> &[f64] {
        &self.reward_sums
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_observation_sets_single_counts() {
        let mut mb = ModelBasedEstimator::new(2);
        mb.observe_transition(0, 1.0, 1);
        assert_eq!(mb.transition_counts()[0][1], 1);
        assert_eq!(mb.visit_counts()[0], 1);
        assert!((mb.reward_sums()[0] - 1.0).abs() < 1e-15);
        assert_eq!(mb.visit_counts()[1], 0);
    }

    #[test]
    fn transition_count_conservation_over_a_path() {
        let states = [0usize, 1, 1, 0, 1, 0, 0];
        let mut mb = ModelBasedEstimator::new(2);
        for t in 0..states.len() {
            if t + 1 < states.len() {
                mb.observe_transition(states[t], 0.0, states[t + 1]);
            } else {
                mb.observe_final(states[t], 0.0);
            }
        }
        let total: u64 = mb.transition_counts().iter().flatten().sum();
        assert_eq!(total as usize, states.len() - 1);
        // Final state of the path is one transition short of its visits.
        let row_sum: u64 = mb.transition_counts()[0].iter().sum();
        assert_eq!(row_sum + 1, mb.visit_counts()[0]);
    }

    #[test]
    fn unvisited_row_is_uniform_smoothing() {
        let mb = ModelBasedEstimator::new(4);
        let p = mb.estimated_transitions();
        for row in &p {
            for &x in row {
                assert!((x - 0.25).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn estimated_rows_are_exactly_stochastic() {
        let mut mb = ModelBasedEstimator::new(3);
        for (s, r, n) in [(0, 0.5, 1), (1, 0.0, 2), (2, 1.0, 0), (0, 0.5, 2)] {
            mb.observe_transition(s, r, n);
        }
        mb.observe_final(2, 1.0);
        for row in mb.estimated_transitions() {
            let sum: f64 = row.iter().sum();
            assert!((sum - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn no_observations_give_the_zero_vector() {
        let mb = ModelBasedEstimator::new(5);
        let v = mb.estimate(0.9);
        assert!(v.values.iter().all(|&x| x.abs() < 1e-12));
    }

    #[test]
    fn one_state_chain_smoothed_scalar_solve() {
        let mut mb = ModelBasedEstimator::new(1);
        mb.observe_transition(0, 1.0, 0);
        mb.observe_transition(0, 1.0, 0);
        mb.observe_final(0, 1.0);
        // r_hat = 3/(1 + 3), P_hat = 1, so v = 0.75 / (1 - gamma).
        let v = mb.estimate(0.5);
        assert!((v.values[0] - 1.5).abs() < 1e-12);
    }
}
