//! The RiverSwim experiment harness.
//!
//! Two experiments, mirroring the two figures they reproduce:
//!
//! - the *tau* experiment runs one loop estimator per state over many
//!   seeded paths and relates each state's mean final error to the square
//!   root of its maximal expected hitting time `√τ_s`;
//! - the *comparison* experiment runs a set of estimators over the same
//!   paths and records each one's normalized `‖v̂ - v‖_∞` trajectory at
//!   geometrically spaced checkpoints.
//!
//! Errors are normalized by `max_s v(s)` so they are comparable across
//! discount factors. Runs are independent given `seed_base + run_index`
//! and may execute concurrently; results are merged by run index, so
//! reports are identical regardless of the parallelism degree.

use std::fmt;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::chain;
use crate::estimators::{LoopEstimator, ModelBasedEstimator, TdEstimator};
use crate::mrp::{Mrp, RewardSpec};
use crate::stats;

/// The six-state RiverSwim chain induced by always swimming upstream:
/// progress upstream succeeds with probability 0.3, the current pushes
/// back downstream with probability 0.1 (0.7 from the top state), and the
/// only reward is 1 at the most upstream state.
pub fn build_riverswim() -> Mrp {
    let transitions = vec![
        vec![0.7, 0.3, 0.0, 0.0, 0.0, 0.0],
        vec![0.1, 0.6, 0.3, 0.0, 0.0, 0.0],
        vec![0.0, 0.1, 0.6, 0.3, 0.0, 0.0],
        vec![0.0, 0.0, 0.1, 0.6, 0.3, 0.0],
        vec![0.0, 0.0, 0.0, 0.1, 0.6, 0.3],
        vec![0.0, 0.0, 0.0, 0.0, 0.7, 0.3],
    ];
    let mut rewards = vec![RewardSpec::Deterministic { mean: 0.0 }; 6];
    rewards[5] = RewardSpec::Deterministic { mean: 1.0 };
    Mrp::new(transitions, rewards, 1.0)
}

/// Which estimator to run in a comparison experiment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EstimatorDescriptor {
    /// One loop estimator per state.
    Loop,
    /// Add-1 smoothed model-based estimator.
    ModelBased,
    /// TD(k) with learning-rate exponent `d`.
    Td { k: usize, d: f64 },
}

impl EstimatorDescriptor {
    /// Stable label used in CSV rows and report metadata.
    pub fn label(&self) -> String {
        match *self {
            EstimatorDescriptor::Loop => "loop".to_string(),
            EstimatorDescriptor::ModelBased => "model_based".to_string(),
            EstimatorDescriptor::Td { k, d } => format!("td_k{k}_d{d}"),
        }
    }
}

impl fmt::Display for EstimatorDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

/// The default estimator set for comparison runs: loop, model-based,
/// TD(0) and TD(10) with d = 1, and TD(0) with d = 1/2.
pub const COMPARISON_ESTIMATORS: [EstimatorDescriptor; 5] = [
    EstimatorDescriptor::Loop,
    EstimatorDescriptor::ModelBased,
    EstimatorDescriptor::Td { k: 0, d: 1.0 },
    EstimatorDescriptor::Td { k: 10, d: 1.0 },
    EstimatorDescriptor::Td { k: 0, d: 0.5 },
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExperimentMode {
    Tau,
    Comparison,
}

impl ExperimentMode {
    pub fn label(&self) -> &'static str {
        match self {
            ExperimentMode::Tau => "tau",
            ExperimentMode::Comparison => "comparison",
        }
    }
}

/// Everything that determines an experiment's output.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub gamma: f64,
    pub horizon: usize,
    pub num_runs: usize,
    pub seed_base: u64,
    pub estimators: Vec<EstimatorDescriptor>,
    pub start_state: usize,
}

impl ExperimentConfig {
    /// Config for the tau experiment (loop estimators only, start at the
    /// most downstream state).
    pub fn tau(gamma: f64, horizon: usize, num_runs: usize, seed_base: u64) -> Self {
        ExperimentConfig {
            gamma,
            horizon,
            num_runs,
            seed_base,
            estimators: vec![EstimatorDescriptor::Loop],
            start_state: 0,
        }
    }

    /// Config for the estimator-comparison experiment.
    pub fn comparison(gamma: f64, horizon: usize, num_runs: usize, seed_base: u64) -> Self {
        ExperimentConfig {
            gamma,
            horizon,
            num_runs,
            seed_base,
            estimators: COMPARISON_ESTIMATORS.to_vec(),
            start_state: 0,
        }
    }
}

/// One `‖v̂ - v‖_∞ / max_s v(s)` sample: estimator `estimator` (an index
/// into the config's estimator list) after the first `step` steps of run
/// `run`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CheckpointError {
    pub run: usize,
    pub estimator: usize,
    pub step: usize,
    pub normalized_error: f64,
}

/// One `|v̂_T(s) - v(s)| / max_s v(s)` sample from the tau experiment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateError {
    pub run: usize,
    pub state: usize,
    pub normalized_error: f64,
}

/// Least-squares fit of per-state mean error against `√τ_s`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TauFit {
    pub slope: f64,
    pub intercept: f64,
    pub pearson_r: f64,
    pub r_squared: f64,
}

/// Full record of one experiment: configuration echo, ground truth, and
/// every per-run error sample.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentReport {
    pub mode: ExperimentMode,
    pub config: ExperimentConfig,
    pub exact_values: Vec<f64>,
    /// `max_s v(s)`, the error normalization constant.
    pub normalizer: f64,
    /// `τ_s` per state.
    pub tau: Vec<f64>,
    /// Checkpoint steps (comparison mode; empty in tau mode).
    pub checkpoints: Vec<usize>,
    pub checkpoint_errors: Vec<CheckpointError>,
    /// Per-(run, state) final errors (tau mode; empty in comparison mode).
    pub state_errors: Vec<StateError>,
    pub tau_fit: Option<TauFit>,
}

/// Errors from writing report files.
#[derive(Debug, Error)]
pub enum ReportWriteError {
    #[error("output file {0} already exists")]
    AlreadyExists(PathBuf),
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Checkpoint grid `{10², 10^2.25, 10^2.5, ...}` capped by and always
/// including the horizon.
pub fn geometric_checkpoints(horizon: usize) -> Vec<usize> {
    assert!(horizon >= 1);
    let mut out = Vec::new();
    let mut exponent = 2.0f64;
    loop {
        let step = 10f64.powf(exponent).round() as usize;
        if step >= horizon {
            break;
        }
        out.push(step);
        exponent += 0.25;
    }
    out.push(horizon);
    out
}

/// `τ_s` for every state of the chain. Panics if some state is
/// unreachable; experiment chains are irreducible.
pub fn tau_vector(mrp: &Mrp) -> Vec<f64> {
    (0..mrp.num_states())
        .map(|s| {
            chain::hitting_profile(mrp.transitions(), s)
                .expect("experiment chains have all states reachable")
                .tau
        })
        .collect()
}

/// The error booked for a state whose loop estimator has not completed a
/// loop yet: the worst case `r_max/(1-γ)`, normalized.
fn normalized_state_error(
    estimate: Option<f64>,
    exact: f64,
    r_max: f64,
    gamma: f64,
    normalizer: f64,
) -> f64 {
    let err = match estimate {
        Some(v) => (v - exact).abs(),
        None => r_max / (1.0 - gamma),
    };
    err / normalizer
}

fn check_config(mrp: &Mrp, config: &ExperimentConfig) {
    assert!(config.num_runs >= 1, "need at least one run");
    assert!(config.horizon >= 1, "need at least one step");
    assert!(config.start_state < mrp.num_states(), "start state out of range");
    assert!(!config.estimators.is_empty(), "need at least one estimator");
}

/// Runs the loop estimator on every state over `num_runs` seeded paths and
/// summarizes per-state final errors against `√τ_s`.
pub fn run_tau_experiment(mrp: &Mrp, config: &ExperimentConfig) -> ExperimentReport {
    check_config(mrp, config);
    assert_eq!(
        config.estimators,
        vec![EstimatorDescriptor::Loop],
        "the tau experiment runs exactly the loop estimator"
    );
    let exact = mrp.exact_values(config.gamma).expect("gamma in [0, 1)");
    let normalizer = exact.max_value();
    let tau = tau_vector(mrp);
    let num_states = mrp.num_states();

    let per_run: Vec<Vec<f64>> = (0..config.num_runs)
        .into_par_iter()
        .map(|run| {
            let seed = config.seed_base.wrapping_add(run as u64);
            let path = mrp.simulate(config.start_state, config.horizon, seed);
            let mut loops: Vec<LoopEstimator> = (0..num_states)
                .map(|target| LoopEstimator::new(target, config.gamma))
                .collect();
            for (state, reward) in path.steps() {
                for le in loops.iter_mut() {
                    le.observe(state, reward);
                }
            }
            loops
                .iter()
                .enumerate()
                .map(|(s, le)| {
                    normalized_state_error(
                        le.estimate(),
                        exact.values[s],
                        mrp.r_max(),
                        config.gamma,
                        normalizer,
                    )
                })
                .collect()
        })
        .collect();

    let mut state_errors = Vec::with_capacity(config.num_runs * num_states);
    for (run, errors) in per_run.iter().enumerate() {
        for (state, &normalized_error) in errors.iter().enumerate() {
            state_errors.push(StateError { run, state, normalized_error });
        }
    }

    let mean_errors: Vec<f64> = (0..num_states)
        .map(|s| stats::mean(&per_run.iter().map(|e| e[s]).collect::<Vec<_>>()))
        .collect();
    let sqrt_tau: Vec<f64> = tau.iter().map(|&t| t.sqrt()).collect();
    let (slope, intercept) = stats::linear_fit(&sqrt_tau, &mean_errors);
    let pearson_r = stats::pearson(&sqrt_tau, &mean_errors);
    let tau_fit = TauFit { slope, intercept, pearson_r, r_squared: pearson_r * pearson_r };

    ExperimentReport {
        mode: ExperimentMode::Tau,
        config: config.clone(),
        exact_values: exact.values,
        normalizer,
        tau,
        checkpoints: Vec::new(),
        checkpoint_errors: Vec::new(),
        state_errors,
        tau_fit: Some(tau_fit),
    }
}

/// One estimator wired for streaming consumption inside a comparison run.
enum Instance {
    Loop(Vec<LoopEstimator>),
    ModelBased(ModelBasedEstimator),
    Td(TdEstimator),
}

impl Instance {
    fn new(descriptor: EstimatorDescriptor, num_states: usize, gamma: f64) -> Instance {
        match descriptor {
            EstimatorDescriptor::Loop => Instance::Loop(
                (0..num_states)
                    .map(|target| LoopEstimator::new(target, gamma))
                    .collect(),
            ),
            EstimatorDescriptor::ModelBased => {
                Instance::ModelBased(ModelBasedEstimator::new(num_states))
            }
            EstimatorDescriptor::Td { k, d } => {
                Instance::Td(TdEstimator::new(num_states, k, d, gamma))
            }
        }
    }

    fn observe(&mut self, state: usize, reward: f64, next_state: Option<usize>) {
        match self {
            Instance::Loop(loops) => {
                for le in loops.iter_mut() {
                    le.observe(state, reward);
                }
            }
            Instance::ModelBased(mb) => match next_state {
                Some(next) => mb.observe_transition(state, reward, next),
                None => mb.observe_final(state, reward),
            },
            Instance::Td(td) => td.observe(state, reward),
        }
    }

    fn normalized_sup_error(
        &self,
        exact: &[f64],
        r_max: f64,
        gamma: f64,
        normalizer: f64,
    ) -> f64 {
        match self {
            Instance::Loop(loops) => loops
                .iter()
                .enumerate()
                .map(|(s, le)| {
                    normalized_state_error(le.estimate(), exact[s], r_max, gamma, normalizer)
                })
                .fold(0.0, f64::max),
            Instance::ModelBased(mb) => {
                let v = mb.estimate(gamma);
                sup_error(&v.values, exact) / normalizer
            }
            Instance::Td(td) => sup_error(td.estimates(), exact) / normalizer,
        }
    }
}

fn sup_error(estimates: &[f64], exact: &[f64]) -> f64 {
    estimates
        .iter()
        .zip(exact)
        .map(|(&a, &b)| (a - b).abs())
        .fold(0.0, f64::max)
}

/// Runs every configured estimator over the same seeded paths, recording
/// normalized `‖v̂ - v‖_∞` at each checkpoint.
pub fn run_comparison(mrp: &Mrp, config: &ExperimentConfig) -> ExperimentReport {
    check_config(mrp, config);
    let exact = mrp.exact_values(config.gamma).expect("gamma in [0, 1)");
    let normalizer = exact.max_value();
    let tau = tau_vector(mrp);
    let checkpoints = geometric_checkpoints(config.horizon);
    let num_states = mrp.num_states();

    let per_run: Vec<Vec<(usize, usize, f64)>> = (0..config.num_runs)
        .into_par_iter()
        .map(|run| {
            let seed = config.seed_base.wrapping_add(run as u64);
            let path = mrp.simulate(config.start_state, config.horizon, seed);
            let mut instances: Vec<Instance> = config
                .estimators
                .iter()
                .map(|&d| Instance::new(d, num_states, config.gamma))
                .collect();
            let mut out = Vec::with_capacity(checkpoints.len() * instances.len());
            let mut next_checkpoint = 0;
            for t in 0..path.len() {
                let state = path.states[t];
                let reward = path.rewards[t];
                let next_state = path.states.get(t + 1).copied();
                for inst in instances.iter_mut() {
                    inst.observe(state, reward, next_state);
                }
                if next_checkpoint < checkpoints.len() && t + 1 == checkpoints[next_checkpoint] {
                    for (i, inst) in instances.iter().enumerate() {
                        out.push((
                            i,
                            checkpoints[next_checkpoint],
                            inst.normalized_sup_error(
                                &exact.values,
                                mrp.r_max(),
                                config.gamma,
                                normalizer,
                            ),
                        ));
                    }
                    next_checkpoint += 1;
                }
            }
            out
        })
        .collect();

    let mut checkpoint_errors = Vec::new();
    for (run, rows) in per_run.iter().enumerate() {
        for &(estimator, step, normalized_error) in rows {
            checkpoint_errors.push(CheckpointError { run, estimator, step, normalized_error });
        }
    }

    ExperimentReport {
        mode: ExperimentMode::Comparison,
        config: config.clone(),
        exact_values: exact.values,
        normalizer,
        tau,
        checkpoints,
        checkpoint_errors,
        state_errors: Vec::new(),
        tau_fit: None,
    }
}

/// Metadata document mirrored into `meta.json`.
#[derive(Serialize)]
struct MetaDoc<'a> {
    mode: &'static str,
    config: MetaConfig,
    exact_values: &'a [f64],
    normalizer: f64,
    tau: &'a [f64],
    checkpoints: &'a [usize],
    tau_fit: Option<TauFit>,
}

#[derive(Serialize)]
struct MetaConfig {
    gamma: f64,
    horizon: usize,
    num_runs: usize,
    seed_base: u64,
    start_state: usize,
    estimators: Vec<String>,
}

impl ExperimentReport {
    pub fn estimator_labels(&self) -> Vec<String> {
        self.config.estimators.iter().map(|d| d.label()).collect()
    }

    /// Per-state `(mean, sample std)` of the tau experiment's final
    /// normalized errors.
    pub fn state_error_stats(&self) -> Vec<(f64, f64)> {
        let num_states = self.exact_values.len();
        (0..num_states)
            .map(|s| {
                let errors: Vec<f64> = self
                    .state_errors
                    .iter()
                    .filter(|e| e.state == s)
                    .map(|e| e.normalized_error)
                    .collect();
                (stats::mean(&errors), stats::sample_std(&errors))
            })
            .collect()
    }

    /// Final-checkpoint errors of one estimator, ordered by run.
    pub fn final_errors_for(&self, estimator: usize) -> Vec<f64> {
        let last = self.checkpoints.last().copied().unwrap_or(0);
        self.checkpoint_errors
            .iter()
            .filter(|e| e.estimator == estimator && e.step == last)
            .map(|e| e.normalized_error)
            .collect()
    }

    /// Mean normalized error of one estimator at each checkpoint, in
    /// checkpoint order.
    pub fn mean_checkpoint_errors_for(&self, estimator: usize) -> Vec<f64> {
        self.checkpoints
            .iter()
            .map(|&step| {
                let errors: Vec<f64> = self
                    .checkpoint_errors
                    .iter()
                    .filter(|e| e.estimator == estimator && e.step == step)
                    .map(|e| e.normalized_error)
                    .collect();
                stats::mean(&errors)
            })
            .collect()
    }

    /// `tau.csv`: one row per state with the error summary of the tau
    /// experiment. Floats use the shortest representation that round-trips.
    pub fn tau_csv(&self) -> String {
        let mut out = String::from("state,tau,sqrt_tau,mean_error,std_error\n");
        let summary = self.state_error_stats();
        for (state, &tau) in self.tau.iter().enumerate() {
            let (mean, std) = summary[state];
            out.push_str(&format!("{state},{tau},{},{mean},{std}\n", tau.sqrt()));
        }
        out
    }

    /// `comparison.csv`: one row per (run, estimator, checkpoint).
    pub fn comparison_csv(&self) -> String {
        let labels = self.estimator_labels();
        let mut rows: Vec<&CheckpointError> = self.checkpoint_errors.iter().collect();
        rows.sort_by_key(|e| (e.run, e.estimator, e.step));
        let mut out = String::from("run,estimator,step,normalized_error\n");
        for e in rows {
            out.push_str(&format!(
                "{},{},{},{}\n",
                e.run, labels[e.estimator], e.step, e.normalized_error
            ));
        }
        out
    }

    /// `meta.json`: config echo, ground truth, and fit coefficients.
    pub fn meta_json(&self) -> String {
        let doc = MetaDoc {
            mode: self.mode.label(),
            config: MetaConfig {
                gamma: self.config.gamma,
                horizon: self.config.horizon,
                num_runs: self.config.num_runs,
                seed_base: self.config.seed_base,
                start_state: self.config.start_state,
                estimators: self.estimator_labels(),
            },
            exact_values: &self.exact_values,
            normalizer: self.normalizer,
            tau: &self.tau,
            checkpoints: &self.checkpoints,
            tau_fit: self.tau_fit,
        };
        let mut text = serde_json::to_string_pretty(&doc).expect("report serializes");
        text.push('\n');
        text
    }

    /// Writes the mode's CSV plus `meta.json` into `dir`, creating the
    /// directory if needed. Existing files are only overwritten when
    /// `force` is set.
    pub fn write_to_dir(&self, dir: &Path, force: bool) -> Result<Vec<PathBuf>, ReportWriteError> {
        fs::create_dir_all(dir)?;
        let files: Vec<(&str, String)> = match self.mode {
            ExperimentMode::Tau => vec![
                ("tau.csv", self.tau_csv()),
                ("meta.json", self.meta_json()),
            ],
            ExperimentMode::Comparison => vec![
                ("comparison.csv", self.comparison_csv()),
                ("meta.json", self.meta_json()),
            ],
        };
        let mut written = Vec::new();
        for (name, _) in &files {
            let path = dir.join(name);
            if path.exists() && !force {
                return Err(ReportWriteError::AlreadyExists(path));
            }
        }
        for (name, contents) in files {
            let path = dir.join(name);
            fs::write(&path, contents)?;
            written.push(path);
        }
        Ok(written)
    }
}
