//! Shared helpers for integration tests: seeded chain generators and the
//! independent oracle computations (power iteration, excursion sampling,
//! loop-statistics enumeration) that implementation results are checked
//! against. Nothing here goes through the library's solver or estimator
//! paths unless the test is explicitly about them.

#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use mrpeval::mrp::{Mrp, RewardSpec};

/// Random row-stochastic matrix with every entry at least `floor`;
/// a positive floor makes the chain irreducible and aperiodic.
pub fn random_transitions(rng: &mut ChaCha8Rng, num_states: usize, floor: f64) -> Vec<Vec<f64>> {
    assert!(num_states as f64 * floor < 1.0, "floor too large for this many states");
    let spread = 1.0 - num_states as f64 * floor;
    (0..num_states)
        .map(|_| {
            let raw: Vec<f64> = (0..num_states).map(|_| 0.01 + rng.random::<f64>()).collect();
            let sum: f64 = raw.iter().sum();
            raw.iter().map(|w| floor + spread * w / sum).collect()
        })
        .collect()
}

/// Random valid MRP with r_max = 1 and a mix of reward spec kinds.
pub fn random_mrp(rng: &mut ChaCha8Rng, num_states: usize, floor: f64) -> Mrp {
    let transitions = random_transitions(rng, num_states, floor);
    let rewards: Vec<RewardSpec> = (0..num_states)
        .map(|_| {
            if rng.random::<f64>() < 0.5 {
                RewardSpec::Deterministic { mean: rng.random::<f64>() }
            } else {
                RewardSpec::Bernoulli { p: rng.random::<f64>(), magnitude: rng.random::<f64>() }
            }
        })
        .collect();
    let mrp = Mrp::new(transitions, rewards, 1.0);
    assert!(mrp.is_valid(), "generator produced an invalid chain");
    mrp
}

/// Stationary distribution by forward iteration of the row vector
/// `pi <- pi P` to a 1e-14 sup-norm fixed point.
pub fn stationary_by_power_iteration(transitions: &[Vec<f64>]) -> Vec<f64> {
    let s = transitions.len();
    let mut pi = vec![1.0 / s as f64; s];
    for _ in 0..200_000 {
        let mut next = vec![0.0; s];
        for (x, row) in transitions.iter().enumerate() {
            for (y, &p) in row.iter().enumerate() {
                next[y] += pi[x] * p;
            }
        }
        let delta = pi
            .iter()
            .zip(&next)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        pi = next;
        if delta < 1e-14 {
            break;
        }
    }
    let total: f64 = pi.iter().sum();
    pi.iter_mut().for_each(|x| *x /= total);
    pi
}

fn categorical(row: &[f64], rng: &mut ChaCha8Rng) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (i, &p) in row.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    row.len() - 1
}

/// Samples `count` first-return times to `target` by stepping the chain
/// directly (independent of the library's simulate path).
pub fn excursion_lengths(
    transitions: &[Vec<f64>],
    target: usize,
    count: usize,
    seed: u64,
) -> Vec<u64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let mut x = target;
        let mut len = 0u64;
        loop {
            x = categorical(&transitions[x], &mut rng);
            len += 1;
            if x == target {
                break;
            }
        }
        out.push(len);
    }
    out
}

/// The matrix of expected first return times, `Y[x][y] = E_x[H_y+]`,
/// assembled column-by-column from the hitting profile of every target.
#[allow(clippy::needless_range_loop)] // target indexes the column being filled
pub fn return_time_matrix(transitions: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let s = transitions.len();
    let mut y = vec![vec![0.0; s]; s];
    for target in 0..s {
        let profile = mrpeval::chain::hitting_profile(transitions, target)
            .expect("chain must be irreducible");
        for (x, &h) in profile.expected_hitting.iter().enumerate() {
            y[x][target] = h;
        }
    }
    y
}

/// 0-based step index of the `n`-th visit (n >= 1) to `target`, i.e. the
/// waiting time W_n.
pub fn nth_visit_index(states: &[usize], target: usize, n: usize) -> Option<usize> {
    let mut seen = 0;
    for (t, &x) in states.iter().enumerate() {
        if x == target {
            seen += 1;
            if seen == n {
                return Some(t);
            }
        }
    }
    None
}

/// Truncated exhaustive enumeration of loop statistics at `target`:
/// propagates the probability mass of all excursions of length up to
/// `max_len`, returning the truncated expected loop discount `alpha`,
/// truncated expected loop discounted rewards `beta`, and the probability
/// mass of excursions still open after `max_len` steps (from which a
/// truncation budget follows).
pub fn enumerate_loop_stats(
    transitions: &[Vec<f64>],
    mean_rewards: &[f64],
    target: usize,
    gamma: f64,
    max_len: usize,
) -> (f64, f64, f64) {
    let s = transitions.len();
    let mut alpha = 0.0;
    // Step u = 0 of every loop sits at the target.
    let mut beta = mean_rewards[target];

    // mass[y] = P[loop still open at step u, X_u = y] for y != target.
    let mut mass = vec![0.0; s];
    for (y, &p) in transitions[target].iter().enumerate() {
        if y == target {
            alpha += gamma * p; // loops of length 1
        } else {
            mass[y] = p;
        }
    }
    let mut discount = gamma; // gamma^u at u = 1
    beta += discount
        * mass
            .iter()
            .zip(mean_rewards)
            .map(|(&m, &r)| m * r)
            .sum::<f64>();

    for _u in 2..=max_len {
        discount *= gamma;
        let mut next = vec![0.0; s];
        let mut returned = 0.0;
        for (y, &m) in mass.iter().enumerate() {
            if m == 0.0 {
                continue;
            }
            for (z, &p) in transitions[y].iter().enumerate() {
                if z == target {
                    returned += m * p;
                } else {
                    next[z] += m * p;
                }
            }
        }
        alpha += discount * returned;
        beta += discount
            * next
                .iter()
                .zip(mean_rewards)
                .map(|(&m, &r)| m * r)
                .sum::<f64>();
        mass = next;
    }
    (alpha, beta, mass.iter().sum())
}

/// Path to the compiled CLI binary.
pub fn cli_bin() -> &'static str {
    env!("CARGO_BIN_EXE_mrpeval")
}
