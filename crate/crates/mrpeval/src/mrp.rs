//! Finite Markov reward processes: construction, validation, exact
//! discounted values, and seeded sample-path simulation.
//!
//! An [`Mrp`] couples a row-stochastic transition matrix with a per-state
//! reward distribution whose support lies in `[0, r_max]`. Values are
//! solved exactly from the Bellman equation `v = r̄ + γPv`, and sample
//! paths are generated by an explicitly seeded ChaCha8 stream so that
//! identical inputs reproduce identical paths on every platform.

use std::fmt;
use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg;

/// Row sums may deviate from 1 by at most this much before validation
/// flags the row.
pub const ROW_SUM_TOLERANCE: f64 = 1e-12;

/// A per-state reward distribution with support contained in `[0, r_max]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum RewardSpec {
    /// Always pays `mean`.
    Deterministic { mean: f64 },
    /// Pays `magnitude` with probability `p`, otherwise 0.
    Bernoulli { p: f64, magnitude: f64 },
}

impl RewardSpec {
    /// Expected reward of this spec.
    pub fn mean(&self) -> f64 {
        match *self {
            RewardSpec::Deterministic { mean } => mean,
            RewardSpec::Bernoulli { p, magnitude } => p * magnitude,
        }
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> f64 {
        match *self {
            RewardSpec::Deterministic { mean } => mean,
            RewardSpec::Bernoulli { p, magnitude } => {
                if rng.random::<f64>() < p {
                    magnitude
                } else {
                    0.0
                }
            }
        }
    }

    /// Checks that the support of the spec lies in `[0, r_max]`.
    fn support_violation(&self, r_max: f64) -> Option<String> {
        match *self {
            RewardSpec::Deterministic { mean } => {
                if !mean.is_finite() || mean < 0.0 || mean > r_max {
                    Some(format!("deterministic mean {mean} outside [0, {r_max}]"))
                } else {
                    None
                }
            }
            RewardSpec::Bernoulli { p, magnitude } => {
                if !p.is_finite() || !(0.0..=1.0).contains(&p) {
                    Some(format!("bernoulli p {p} outside [0, 1]"))
                } else if !magnitude.is_finite() || magnitude < 0.0 || magnitude > r_max {
                    Some(format!("bernoulli magnitude {magnitude} outside [0, {r_max}]"))
                } else {
                    None
                }
            }
        }
    }
}

/// One way an [`Mrp`] can fail validation. Violations are reported, not
/// raised: [`Mrp::validate`] returns the complete list.
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    /// The chain has no states at all.
    NoStates,
    /// A transition row has the wrong length.
    NonSquareRow { row: usize, len: usize, expected: usize },
    /// A transition row does not sum to 1 within [`ROW_SUM_TOLERANCE`].
    RowSum { row: usize, sum: f64 },
    /// A transition probability is negative.
    NegativeTransition { row: usize, col: usize, value: f64 },
    /// A transition probability is NaN or infinite.
    NonFiniteTransition { row: usize, col: usize, value: f64 },
    /// The reward list length does not match the number of states.
    RewardCountMismatch { expected: usize, found: usize },
    /// A reward spec has support outside `[0, r_max]`.
    RewardSupport { state: usize, detail: String },
    /// `r_max` is not a positive finite number.
    RMaxNotPositive { r_max: f64 },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NoStates => write!(f, "the MRP must have at least one state"),
            Violation::NonSquareRow { row, len, expected } => {
                write!(f, "transition row {row} has {len} entries, expected {expected}")
            }
            Violation::RowSum { row, sum } => {
                write!(f, "transition row {row} sums to {sum}, expected 1 within {ROW_SUM_TOLERANCE:e}")
            }
            Violation::NegativeTransition { row, col, value } => {
                write!(f, "transition[{row}][{col}] = {value} is negative")
            }
            Violation::NonFiniteTransition { row, col, value } => {
                write!(f, "transition[{row}][{col}] = {value} is not finite")
            }
            Violation::RewardCountMismatch { expected, found } => {
                write!(f, "{found} reward specs for {expected} states")
            }
            Violation::RewardSupport { state, detail } => {
                write!(f, "reward spec for state {state}: {detail}")
            }
            Violation::RMaxNotPositive { r_max } => {
                write!(f, "r_max = {r_max} must be positive and finite")
            }
        }
    }
}

/// Errors from [`Mrp::exact_values`].
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ValueError {
    #[error("discount factor must lie in [0, 1), got {0}")]
    InvalidGamma(f64),
    #[error("the Bellman system (I - gamma P) is singular")]
    Singular,
}

/// Errors from reading an MRP spec file.
#[derive(Debug, Error)]
pub enum LoadError {
    #[error("failed to read MRP file: {0}")]
    Io(#[from] std::io::Error),
    #[error("failed to parse MRP file: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("num_states is {declared} but the transition matrix has {rows} rows")]
    StateCountMismatch { declared: usize, rows: usize },
    #[error("invalid MRP:{}", format_violations(.0))]
    Invalid(Vec<Violation>),
}

fn format_violations(violations: &[Violation]) -> String {
    let mut out = String::new();
    for v in violations {
        out.push_str("\n  - ");
        out.push_str(&v.to_string());
    }
    out
}

/// A finite Markov reward process: a row-stochastic transition matrix plus
/// a bounded reward spec per state.
///
/// The struct itself places no constraints on its fields so that invalid
/// chains can be constructed and inspected; [`Mrp::validate`] reports every
/// violation, and operations that state "valid MRP" as a precondition are
/// free to assume emptiness of that list.
#[derive(Debug, Clone, PartialEq)]
pub struct Mrp {
    transitions: Vec<Vec<f64>>,
    rewards: Vec<RewardSpec>,
    r_max: f64,
}

/// On-disk JSON schema for an MRP spec file.
#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MrpFile {
    num_states: usize,
    transitions: Vec<Vec<f64>>,
    rewards: Vec<RewardSpec>,
    r_max: f64,
}

impl Mrp {
    pub fn new(transitions: Vec<Vec<f64>>, rewards: Vec<RewardSpec>, r_max: f64) -> Self {
        Mrp { transitions, rewards, r_max }
    }

    pub fn num_states(&self) -> usize {
        self.transitions.len()
    }

    pub fn transitions(&self) -> &[Vec<f64>] {
        &self.transitions
    }

    pub fn rewards(&self) -> &[RewardSpec] {
        &self.rewards
    }

    pub fn r_max(&self) -> f64 {
        self.r_max
    }

    /// Checks every structural invariant and returns the full list of
    /// violations; an empty list means the MRP is valid.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let s = self.transitions.len();
        if s == 0 {
            out.push(Violation::NoStates);
            return out;
        }
        for (row, entries) in self.transitions.iter().enumerate() {
            if entries.len() != s {
                out.push(Violation::NonSquareRow { row, len: entries.len(), expected: s });
                continue;
            }
            let mut sum = 0.0;
            for (col, &p) in entries.iter().enumerate() {
                if !p.is_finite() {
                    out.push(Violation::NonFiniteTransition { row, col, value: p });
                } else if p < 0.0 {
                    out.push(Violation::NegativeTransition { row, col, value: p });
                }
                sum += p;
            }
            let deviation = (sum - 1.0).abs();
            if deviation.is_nan() || deviation > ROW_SUM_TOLERANCE {
                out.push(Violation::RowSum { row, sum });
            }
        }
        if !(self.r_max > 0.0 && self.r_max.is_finite()) {
            out.push(Violation::RMaxNotPositive { r_max: self.r_max });
        }
        if self.rewards.len() != s {
            out.push(Violation::RewardCountMismatch { expected: s, found: self.rewards.len() });
        } else {
            for (state, spec) in self.rewards.iter().enumerate() {
                if let Some(detail) = spec.support_violation(self.r_max) {
                    out.push(Violation::RewardSupport { state, detail });
                }
            }
        }
        out
    }

    pub fn is_valid(&self) -> bool {
        self.validate().is_empty()
    }

    /// Mean reward per state, `r̄ : s ↦ E[r(s)]`.
    pub fn mean_rewards(&self) -> Vec<f64> {
        self.rewards.iter().map(RewardSpec::mean).collect()
    }

    /// Exact discounted state values from the direct solve of
    /// `(I - gamma P) v = r̄`.
    ///
    /// `gamma = 0` is allowed (values collapse to the mean rewards);
    /// `gamma >= 1` is rejected here, at the API boundary.
    pub fn exact_values(&self, gamma: f64) -> Result<ValueVector, ValueError> {
        if !(0.0..1.0).contains(&gamma) {
            return Err(ValueError::InvalidGamma(gamma));
        }
        let s = self.num_states();
        let mut a = vec![vec![0.0; s]; s];
        for (i, row) in self.transitions.iter().enumerate() {
            for (j, &p) in row.iter().enumerate() {
                let id = if i == j { 1.0 } else { 0.0 };
                a[i][j] = id - gamma * p;
            }
        }
        let values = linalg::solve(a, self.mean_rewards()).map_err(|_| ValueError::Singular)?;
        Ok(ValueVector { values, gamma })
    }

    /// Simulates a sample path of exactly `steps` states and rewards.
    ///
    /// The path is a pure function of `(self, start_state, steps, seed)`:
    /// the generator is ChaCha8 seeded with `seed`, one uniform draw per
    /// Bernoulli reward and one per transition, so replays are bit-exact.
    pub fn simulate(&self, start_state: usize, steps: usize, seed: u64) -> SamplePath {
        assert!(start_state < self.num_states(), "start state out of range");
        assert!(steps >= 1, "a sample path has at least one step");
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut states = Vec::with_capacity(steps);
        let mut rewards = Vec::with_capacity(steps);
        let mut x = start_state;
        for t in 0..steps {
            states.push(x);
            rewards.push(self.rewards[x].sample(&mut rng));
            if t + 1 < steps {
                x = sample_categorical(&self.transitions[x], &mut rng);
            }
        }
        SamplePath { states, rewards, seed, start_state }
    }

    /// Parses and validates an MRP spec from its JSON text; invalid chains
    /// are refused with the itemized violation list.
    pub fn from_json_str(text: &str) -> Result<Mrp, LoadError> {
        let mrp = Mrp::parse_json_unvalidated(text)?;
        let violations = mrp.validate();
        if !violations.is_empty() {
            return Err(LoadError::Invalid(violations));
        }
        Ok(mrp)
    }

    /// Parses the JSON schema without running validation, for tools that
    /// want to inspect the violation list themselves.
    pub fn parse_json_unvalidated(text: &str) -> Result<Mrp, LoadError> {
        let file: MrpFile = serde_json::from_str(text)?;
        if file.num_states != file.transitions.len() {
            return Err(LoadError::StateCountMismatch {
                declared: file.num_states,
                rows: file.transitions.len(),
            });
        }
        Ok(Mrp::new(file.transitions, file.rewards, file.r_max))
    }

    /// Reads an MRP spec file (see `from_json_str`).
    pub fn load(path: &Path) -> Result<Mrp, LoadError> {
        Mrp::from_json_str(&fs::read_to_string(path)?)
    }

    /// The JSON spec-file representation of this MRP.
    pub fn to_json_string(&self) -> String {
        let file = MrpFile {
            num_states: self.num_states(),
            transitions: self.transitions.clone(),
            rewards: self.rewards.clone(),
            r_max: self.r_max,
        };
        let mut text = serde_json::to_string_pretty(&file).expect("MRP serializes");
        text.push('\n');
        text
    }
}

fn sample_categorical(row: &[f64], rng: &mut ChaCha8Rng) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (i, &p) in row.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    // Rounding can leave the cumulative sum a hair under u; fall back to the
    // last state with positive probability.
    row.iter()
        .rposition(|&p| p > 0.0)
        .unwrap_or(row.len() - 1)
}

/// A seeded realization `(X_t, R_t)` for `0 <= t < T`.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplePath {
    pub states: Vec<usize>,
    pub rewards: Vec<f64>,
    pub seed: u64,
    pub start_state: usize,
}

impl SamplePath {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// Steps of the path as `(state, reward)` pairs.
    pub fn steps(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.states.iter().copied().zip(self.rewards.iter().copied())
    }
}

/// A discounted value vector together with the discount it was computed at.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValueVector {
    pub values: Vec<f64>,
    pub gamma: f64,
}

impl ValueVector {
    /// Largest state value; the normalization constant used by reports.
    pub fn max_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}
