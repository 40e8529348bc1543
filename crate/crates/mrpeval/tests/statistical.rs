//! Seeded statistical invariants of the estimators and the experiment
//! harness on RiverSwim. These complement the per-module unit tests with
//! the distributional claims that only show up over many runs.

mod common;

use mrpeval::estimators::LoopEstimator;
use mrpeval::experiments::{
    build_riverswim, run_comparison, run_tau_experiment, EstimatorDescriptor, ExperimentConfig,
};
use mrpeval::stats;

#[test]
fn loop_estimates_converge_on_every_state_at_one_million_steps() {
    let mrp = build_riverswim();
    let gamma = 0.9;
    let exact = mrp.exact_values(gamma).unwrap();
    let normalizer = exact.max_value();
    let path = mrp.simulate(0, 1_000_000, 42);
    let mut loops: Vec<LoopEstimator> =
        (0..6).map(|s| LoopEstimator::new(s, gamma)).collect();
    for (state, reward) in path.steps() {
        for le in loops.iter_mut() {
            le.observe(state, reward);
        }
    }
    for (s, le) in loops.iter().enumerate() {
        let estimate = le.estimate().expect("every state loops many times by 10^6 steps");
        let normalized = (estimate - exact.values[s]).abs() / normalizer;
        assert!(
            normalized <= 0.02,
            "state {s}: normalized error {normalized} above 2%"
        );
    }
}

#[test]
fn model_based_mean_error_is_nonincreasing_across_checkpoints() {
    let mrp = build_riverswim();
    let config = ExperimentConfig::comparison(0.9, 100_000, 200, 7);
    let report = run_comparison(&mrp, &config);
    let mb_index = 1; // estimator order: loop, model_based, td...
    assert_eq!(config.estimators[mb_index], EstimatorDescriptor::ModelBased);
    let means = report.mean_checkpoint_errors_for(mb_index);
    for w in means.windows(2) {
        assert!(
            w[1] <= w[0],
            "model-based mean error rose between checkpoints: {} -> {}",
            w[0],
            w[1]
        );
    }
}

#[test]
fn tau_experiment_errors_shrink_with_a_longer_horizon() {
    let mrp = build_riverswim();
    let short = run_tau_experiment(&mrp, &ExperimentConfig::tau(0.9, 100_000, 30, 1));
    let long = run_tau_experiment(&mrp, &ExperimentConfig::tau(0.9, 1_000_000, 30, 1));
    let short_stats = short.state_error_stats();
    let long_stats = long.state_error_stats();
    for s in 0..6 {
        assert!(
            long_stats[s].0 < short_stats[s].0,
            "state {s}: mean error did not shrink ({} -> {})",
            short_stats[s].0,
            long_stats[s].0
        );
    }
}

#[test]
fn report_normalizer_is_the_max_exact_value() {
    let mrp = build_riverswim();
    for gamma in [0.5, 0.9, 0.99] {
        let report = run_tau_experiment(&mrp, &ExperimentConfig::tau(gamma, 2_000, 2, 3));
        let max = report
            .exact_values
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max);
        assert_eq!(report.normalizer, max);
    }
}

#[test]
fn loop_estimator_is_less_discount_sensitive_than_td0() {
    // Moving gamma from 0.9 to 0.99 barely moves the loop estimator's
    // final normalized error while TD(0) degrades badly.
    let mrp = build_riverswim();
    let estimators = vec![
        EstimatorDescriptor::Loop,
        EstimatorDescriptor::Td { k: 0, d: 1.0 },
    ];
    let run_at = |gamma: f64| {
        let config = ExperimentConfig {
            gamma,
            horizon: 100_000,
            num_runs: 100,
            seed_base: 11,
            estimators: estimators.clone(),
            start_state: 0,
        };
        let report = run_comparison(&mrp, &config);
        (
            stats::mean(&report.final_errors_for(0)),
            stats::mean(&report.final_errors_for(1)),
        )
    };
    let (loop_09, td0_09) = run_at(0.9);
    let (loop_099, td0_099) = run_at(0.99);
    let loop_shift = (loop_099 - loop_09).abs();
    let td0_shift = (td0_099 - td0_09).abs();
    assert!(
        loop_shift < td0_shift,
        "loop shifted by {loop_shift}, TD(0) by {td0_shift}"
    );
}
