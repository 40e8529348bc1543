//! Hitting-time analysis of finite Markov chains and the closed-form
//! concentration/error bounds built on it.
//!
//! The central object is the [`HittingProfile`] of a target state `s`: the
//! vector of expected first return times `h[x] = E_x[H_s⁺]`, its maximum
//! `τ_s` over start states, and the expected recurrence time `ρ_s = h[s]`.
//! `τ_s` is the instance-dependent quantity that drives every bound here.

use thiserror::Error;

use crate::linalg;
use crate::mrp::{Mrp, RewardSpec};

use std::f64::consts::E;

/// Errors from chain analysis.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ChainError {
    /// The target state is not reachable from every state, so expected
    /// hitting times are infinite for the listed start states.
    #[error("state {target} is unreachable from states {states:?}")]
    Unreachable { target: usize, states: Vec<usize> },
    /// A matrix that must be inverted is singular.
    #[error("singular matrix")]
    Singular,
    /// A bound was evaluated outside the domain its derivation requires.
    #[error("precondition violated: {0}")]
    Precondition(String),
}

/// Expected hitting times of one target state, with the derived summary
/// quantities `τ_s` (max over start states) and `ρ_s` (recurrence time).
#[derive(Debug, Clone, PartialEq)]
pub struct HittingProfile {
    pub target: usize,
    /// `expected_hitting[x] = E_x[H_target⁺]`, the expected number of steps
    /// to reach `target` starting from `x` (at least 1 by definition).
    pub expected_hitting: Vec<f64>,
    pub tau: f64,
    pub rho: f64,
}

/// States with no positive-probability path of length >= 1 into `target`.
fn states_unable_to_reach(transitions: &[Vec<f64>], target: usize) -> Vec<usize> {
    let s = transitions.len();
    let mut can_reach = vec![false; s];
    let mut stack: Vec<usize> = Vec::new();
    for (x, row) in transitions.iter().enumerate() {
        if row[target] > 0.0 {
            can_reach[x] = true;
            stack.push(x);
        }
    }
    while let Some(y) = stack.pop() {
        for (x, row) in transitions.iter().enumerate() {
            if !can_reach[x] && row[y] > 0.0 {
                can_reach[x] = true;
                stack.push(x);
            }
        }
    }
    (0..s).filter(|&x| !can_reach[x]).collect()
}

/// Solves the first-step equations `h[x] = 1 + Σ_{y≠s} P[x][y] h[y]` for the
/// expected first return times to `target`.
///
/// Unreachability is detected structurally (graph reachability on the
/// support of `P`) before solving, because the linear system can be
/// numerically solvable yet meaningless when some state cannot reach the
/// target at all.
pub fn hitting_profile(transitions: &[Vec<f64>], target: usize) -> Result<HittingProfile, ChainError> {
    let s = transitions.len();
    assert!(target < s, "target state out of range");
    debug_assert!(transitions.iter().all(|row| row.len() == s));

    let blocked = states_unable_to_reach(transitions, target);
    if !blocked.is_empty() {
        return Err(ChainError::Unreachable { target, states: blocked });
    }

    let mut a = vec![vec![0.0; s]; s];
    for (x, row) in transitions.iter().enumerate() {
        for (y, &p) in row.iter().enumerate() {
            let id = if x == y { 1.0 } else { 0.0 };
            // Hitting the target ends the excursion, so its column is dropped.
            let q = if y == target { 0.0 } else { p };
            a[x][y] = id - q;
        }
    }
    let h = linalg::solve(a, vec![1.0; s]).map_err(|_| ChainError::Singular)?;
    let tau = h.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let rho = h[target];
    Ok(HittingProfile { target, expected_hitting: h, tau, rho })
}

/// Exponential tail bound on first return times:
/// `P[H_s⁺ >= t] <= e · e^{-t/(e·τ_s)}`, clamped to `[0, 1]`.
pub fn return_time_tail_bound(tau: f64, t: f64) -> f64 {
    assert!(tau > 0.0, "tau must be positive");
    assert!(t > 0.0, "t must be positive");
    (E * (-t / (E * tau)).exp()).clamp(0.0, 1.0)
}

/// High-probability upper bound on the waiting time before the `n`-th
/// visit: `e · n · τ_s · log(e·n/δ)`.
pub fn waiting_time_bound(n: u64, tau: f64, delta: f64) -> f64 {
    assert!(n >= 1, "n must be at least 1");
    assert!(tau > 0.0, "tau must be positive");
    assert!(delta > 0.0 && delta <= 1.0, "delta must lie in (0, 1]");
    let n = n as f64;
    E * n * tau * (E * n / delta).ln()
}

/// Error bound for the loop estimator after `n` completed loops:
/// `r_max/(1-γ)² · sqrt(log(4/δ) / (2n))`.
pub fn visit_error_bound(n: u64, gamma: f64, r_max: f64, delta: f64) -> f64 {
    assert!(n >= 1, "n must be at least 1");
    assert!((0.0..1.0).contains(&gamma), "gamma must lie in [0, 1)");
    assert!(r_max > 0.0, "r_max must be positive");
    assert!(delta > 0.0 && delta <= 1.0, "delta must lie in (0, 1]");
    let n = n as f64;
    r_max / ((1.0 - gamma) * (1.0 - gamma)) * ((4.0 / delta).ln() / (2.0 * n)).sqrt()
}

/// Error bound for the loop estimator after `steps` steps of a single
/// sample path:
/// `r_max/(1-γ)² · sqrt(e·τ_s·log(T/(δ·τ_s))·log(4/δ) / (2T))`,
/// valid for `T > e·δ·τ_s`.
pub fn step_error_bound(
    steps: u64,
    tau: f64,
    gamma: f64,
    r_max: f64,
    delta: f64,
) -> Result<f64, ChainError> {
    assert!((0.0..1.0).contains(&gamma), "gamma must lie in [0, 1)");
    assert!(tau > 0.0, "tau must be positive");
    assert!(r_max > 0.0, "r_max must be positive");
    assert!(delta > 0.0 && delta <= 1.0, "delta must lie in (0, 1]");
    let t = steps as f64;
    if t <= E * delta * tau {
        return Err(ChainError::Precondition(format!(
            "step bound requires T > e*delta*tau = {}, got T = {t}",
            E * delta * tau
        )));
    }
    Ok(r_max / ((1.0 - gamma) * (1.0 - gamma))
        * (E * tau * (t / (delta * tau)).ln() * (4.0 / delta).ln() / (2.0 * t)).sqrt())
}

/// Uniform error bound over all `num_states` states after `steps` steps:
/// `r_max/(1-γ)² · sqrt(e·τ_max·log(S·T/(δ·τ_min))·log(4S/δ) / (2T))`,
/// valid for `T > e·δ·τ_max`. With `S = 1` this is exactly
/// [`step_error_bound`].
pub fn all_states_error_bound(
    steps: u64,
    tau_max: f64,
    tau_min: f64,
    num_states: usize,
    gamma: f64,
    r_max: f64,
    delta: f64,
) -> Result<f64, ChainError> {
    assert!(num_states >= 1, "need at least one state");
    assert!(tau_min > 0.0 && tau_max >= tau_min, "need 0 < tau_min <= tau_max");
    assert!((0.0..1.0).contains(&gamma), "gamma must lie in [0, 1)");
    assert!(r_max > 0.0, "r_max must be positive");
    assert!(delta > 0.0 && delta <= 1.0, "delta must lie in (0, 1]");
    let t = steps as f64;
    let s = num_states as f64;
    if t <= E * delta * tau_max {
        return Err(ChainError::Precondition(format!(
            "all-states bound requires T > e*delta*tau_max = {}, got T = {t}",
            E * delta * tau_max
        )));
    }
    Ok(r_max / ((1.0 - gamma) * (1.0 - gamma))
        * (E * tau_max * (s * t / (delta * tau_min)).ln() * (4.0 * s / delta).ln() / (2.0 * t))
            .sqrt())
}

/// Recovers the transition matrix from the matrix of expected first return
/// times `Y[x][y] = E_x[H_y⁺]` via the identity `Y = P(Y - diag Y + E)`,
/// where `E` is the all-ones matrix; that is, `P = Y (Y - diag Y + E)⁻¹`.
pub fn recover_transitions(y: &[Vec<f64>]) -> Result<Vec<Vec<f64>>, ChainError> {
    let s = y.len();
    assert!(s >= 1, "need at least one state");
    debug_assert!(y.iter().all(|row| row.len() == s));

    // P (Y - diag Y + E) = Y is solved as Aᵀ Pᵀ = Yᵀ: column j of Yᵀ is
    // row j of Y, and the solution column is row j of P.
    let mut a_t = vec![vec![0.0; s]; s];
    for i in 0..s {
        for j in 0..s {
            let diag = if i == j { y[i][i] } else { 0.0 };
            a_t[j][i] = y[i][j] - diag + 1.0;
        }
    }
    let rhs: Vec<Vec<f64>> = y.to_vec();
    linalg::solve_columns(a_t, rhs).map_err(|_| ChainError::Singular)
}

/// Builds the `k`-state chain in which state 0 self-loops with probability
/// `1 - 1/(k-1)` and otherwise enters a deterministic cycle through the
/// remaining `k - 1` states. Its recurrence time at state 0 is exactly 2
/// for every `k`, while the first return time takes only the values 1 and
/// `k` — the standard example of why return times cannot concentrate
/// exponentially around `ρ_s` alone. Rewards are all zero.
pub fn build_mk_chain(k: usize) -> Mrp {
    assert!(k >= 3, "the cycle construction needs k >= 3");
    let mut transitions = vec![vec![0.0; k]; k];
    let q = 1.0 / (k as f64 - 1.0);
    transitions[0][0] = 1.0 - q;
    transitions[0][1] = q;
    for i in 1..k - 1 {
        transitions[i][i + 1] = 1.0;
    }
    transitions[k - 1][0] = 1.0;
    let rewards = vec![RewardSpec::Deterministic { mean: 0.0 }; k];
    Mrp::new(transitions, rewards, 1.0)
}

/// Builds three small chains whose first states are transient and whose
/// sample paths are pairwise indistinguishable with positive probability:
///
/// - top: `s₁' -> s₂` surely, `s₂` absorbing with reward 1;
/// - middle: `s₁ -> {s₂, s₃}` with probability ½ each, both absorbing,
///   reward 1 at `s₂` only;
/// - bottom: `s₁'' -> s₃` surely, `s₃` absorbing with reward 0.
///
/// Their first-state values are `γ/(1-γ)`, `γ/(2(1-γ))`, and 0: no
/// estimator can consistently estimate the value of a transient state from
/// a single path.
pub fn build_transient_triple() -> (Mrp, Mrp, Mrp) {
    let zero = RewardSpec::Deterministic { mean: 0.0 };
    let one = RewardSpec::Deterministic { mean: 1.0 };
    let top = Mrp::new(
        vec![vec![0.0, 1.0], vec![0.0, 1.0]],
        vec![zero, one],
        1.0,
    );
    let middle = Mrp::new(
        vec![
            vec![0.0, 0.5, 0.5],
            vec![0.0, 1.0, 0.0],
            vec![0.0, 0.0, 1.0],
        ],
        vec![zero, one, zero],
        1.0,
    );
    let bottom = Mrp::new(
        vec![vec![0.0, 1.0], vec![0.0, 1.0]],
        vec![zero, zero],
        1.0,
    );
    (top, middle, bottom)
}
