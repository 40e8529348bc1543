//! Command-line front end: validate MRP spec files, solve exact values,
//! simulate paths, analyze hitting times and bounds, run single
//! estimators, and drive the RiverSwim experiments.
//!
//! Exit codes: 0 on success, 1 on validation or runtime failure, 2 on
//! usage errors. All randomness derives from explicit `--seed` flags, so
//! identical invocations produce byte-identical outputs.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand, ValueEnum};

use mrpeval::chain::{self, ChainError};
use mrpeval::estimators::{LoopEstimator, ModelBasedEstimator, TdEstimator};
use mrpeval::experiments::{self, ExperimentConfig};
use mrpeval::mrp::{LoadError, Mrp, ValueError};

#[derive(Parser)]
#[command(
    name = "mrpeval",
    version,
    about = "Policy evaluation tools for finite Markov reward processes"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check an MRP spec file and list every violation.
    Validate {
        /// Path to the MRP JSON file.
        mrp: PathBuf,
    },
    /// Solve the exact discounted values of an MRP.
    Exact {
        mrp: PathBuf,
        /// Discount factor in [0, 1).
        #[arg(long)]
        gamma: f64,
    },
    /// Simulate a seeded sample path and emit it as CSV.
    Simulate {
        mrp: PathBuf,
        /// Start state index.
        #[arg(long)]
        start: usize,
        /// Path length T.
        #[arg(long)]
        steps: usize,
        /// RNG seed.
        #[arg(long)]
        seed: u64,
        /// Write the CSV here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the hitting profile of a target state plus a table of bounds.
    Analyze {
        mrp: PathBuf,
        /// Target state index.
        #[arg(long)]
        target: usize,
        /// Discount factor used in the bound table.
        #[arg(long, default_value_t = 0.9)]
        gamma: f64,
        /// Failure probability used in the bound table.
        #[arg(long, default_value_t = 0.1)]
        delta: f64,
    },
    /// Run one estimator over one simulated path and report its estimate.
    Estimate {
        mrp: PathBuf,
        #[arg(long)]
        estimator: EstimatorArg,
        /// State whose value to report.
        #[arg(long)]
        target: usize,
        #[arg(long)]
        gamma: f64,
        #[arg(long)]
        steps: usize,
        #[arg(long)]
        seed: u64,
        /// TD lookahead depth (td only).
        #[arg(long)]
        k: Option<usize>,
        /// TD learning-rate exponent in [1/2, 1] (td only).
        #[arg(long)]
        d: Option<f64>,
        /// Start state of the simulated path.
        #[arg(long, default_value_t = 0)]
        start: usize,
    },
    /// Run a full experiment and write CSV/JSON reports.
    Experiment {
        /// Which chain to run on; only "riverswim" is built in.
        which: String,
        #[arg(long)]
        mode: ModeArg,
        #[arg(long, default_value_t = 0.9)]
        gamma: f64,
        /// Path length per run.
        #[arg(long, default_value_t = 100_000)]
        steps: usize,
        /// Number of seeded runs.
        #[arg(long, default_value_t = 200)]
        runs: usize,
        /// Base seed; run i uses seed + i.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output directory (created if absent).
        #[arg(long)]
        out_dir: PathBuf,
        /// Worker threads; the output does not depend on this.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        /// Overwrite existing output files.
        #[arg(long)]
        force: bool,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum EstimatorArg {
    Loop,
    Mb,
    Td,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Tau,
    Comparison,
}

/// Failures are reported on stderr; the variant picks the exit code
/// (usage = 2, everything else = 1).
enum CliError {
    Usage(String),
    Failure(String),
}

impl From<LoadError> for CliError {
    fn from(e: LoadError) -> Self {
        CliError::Failure(e.to_string())
    }
}

impl From<ChainError> for CliError {
    fn from(e: ChainError) -> Self {
        CliError::Failure(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Failure(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 2,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Failure(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::Validate { mrp } => cmd_validate(&mrp),
        Command::Exact { mrp, gamma } => cmd_exact(&mrp, gamma),
        Command::Simulate { mrp, start, steps, seed, out } => {
            cmd_simulate(&mrp, start, steps, seed, out.as_deref())
        }
        Command::Analyze { mrp, target, gamma, delta } => cmd_analyze(&mrp, target, gamma, delta),
        Command::Estimate { mrp, estimator, target, gamma, steps, seed, k, d, start } => {
            cmd_estimate(&mrp, estimator, target, gamma, steps, seed, k, d, start)
        }
        Command::Experiment { which, mode, gamma, steps, runs, seed, out_dir, jobs, force } => {
            cmd_experiment(&which, mode, gamma, steps, runs, seed, &out_dir, jobs, force)
        }
    }
}

fn load_mrp(path: &std::path::Path) -> Result<Mrp, CliError> {
    Ok(Mrp::load(path)?)
}

fn check_gamma(gamma: f64) -> Result<(), CliError> {
    if (0.0..1.0).contains(&gamma) {
        Ok(())
    } else {
        Err(CliError::Usage(format!(
            "--gamma must lie in [0, 1), got {gamma}"
        )))
    }
}

fn check_state(name: &str, state: usize, num_states: usize) -> Result<(), CliError> {
    if state < num_states {
        Ok(())
    } else {
        Err(CliError::Usage(format!(
            "--{name} {state} is out of range for a chain with {num_states} states"
        )))
    }
}

fn cmd_validate(path: &std::path::Path) -> Result<(), CliError> {
    let text = fs::read_to_string(path)?;
    let mrp = Mrp::parse_json_unvalidated(&text)?;
    let violations = mrp.validate();
    if violations.is_empty() {
        println!("OK: {} states, r_max = {:?}", mrp.num_states(), mrp.r_max());
        Ok(())
    } else {
        for v in &violations {
            println!("violation: {v}");
        }
        Err(CliError::Failure(format!(
            "{} violation(s) found",
            violations.len()
        )))
    }
}

fn cmd_exact(path: &std::path::Path, gamma: f64) -> Result<(), CliError> {
    let mrp = load_mrp(path)?;
    let v = mrp.exact_values(gamma).map_err(|e| match e {
        ValueError::InvalidGamma(_) => CliError::Usage(e.to_string()),
        ValueError::Singular => CliError::Failure(e.to_string()),
    })?;
    for (s, value) in v.values.iter().enumerate() {
        println!("v[{s}] = {value:?}");
    }
    Ok(())
}

fn cmd_simulate(
    path: &std::path::Path,
    start: usize,
    steps: usize,
    seed: u64,
    out: Option<&std::path::Path>,
) -> Result<(), CliError> {
    let mrp = load_mrp(path)?;
    check_state("start", start, mrp.num_states())?;
    if steps == 0 {
        return Err(CliError::Usage("--steps must be at least 1".into()));
    }
    let sample = mrp.simulate(start, steps, seed);
    let mut csv = String::from("t,state,reward\n");
    for (t, (state, reward)) in sample.steps().enumerate() {
        csv.push_str(&format!("{t},{state},{reward}\n"));
    }
    match out {
        Some(out_path) => {
            fs::write(out_path, csv)?;
            println!("wrote {} steps to {}", steps, out_path.display());
        }
        None => print!("{csv}"),
    }
    Ok(())
}

fn cmd_analyze(
    path: &std::path::Path,
    target: usize,
    gamma: f64,
    delta: f64,
) -> Result<(), CliError> {
    let mrp = load_mrp(path)?;
    check_state("target", target, mrp.num_states())?;
    check_gamma(gamma)?;
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(CliError::Usage(format!(
            "--delta must lie in (0, 1], got {delta}"
        )));
    }
    let profile = chain::hitting_profile(mrp.transitions(), target)?;
    println!("hitting profile for target state {target}");
    for (s, h) in profile.expected_hitting.iter().enumerate() {
        println!("  from state {s}: E[H+] = {h:?}");
    }
    println!("rho = {:?}", profile.rho);
    println!("tau = {:?}", profile.tau);

    let r_max = mrp.r_max();
    println!("bounds at gamma = {gamma:?}, delta = {delta:?}, r_max = {r_max:?}:");
    for t_mult in [1.0, 3.0, 10.0] {
        let t = t_mult * profile.tau;
        println!(
            "  P[H+ >= {t:.1}] <= {:?}",
            chain::return_time_tail_bound(profile.tau, t)
        );
    }
    for n in [50u64, 100, 1_000, 10_000] {
        println!(
            "  waiting_time_bound(n = {n}) = {:?}",
            chain::waiting_time_bound(n, profile.tau, delta)
        );
    }
    for n in [100u64, 1_000, 10_000] {
        println!(
            "  visit_error_bound(n = {n}) = {:?}",
            chain::visit_error_bound(n, gamma, r_max, delta)
        );
    }
    for steps in [10_000u64, 100_000, 1_000_000] {
        match chain::step_error_bound(steps, profile.tau, gamma, r_max, delta) {
            Ok(b) => println!("  step_error_bound(T = {steps}) = {b:?}"),
            Err(_) => println!("  step_error_bound(T = {steps}) = n/a (needs T > e*delta*tau)"),
        }
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_estimate(
    path: &std::path::Path,
    estimator: EstimatorArg,
    target: usize,
    gamma: f64,
    steps: usize,
    seed: u64,
    k: Option<usize>,
    d: Option<f64>,
    start: usize,
) -> Result<(), CliError> {
    let mrp = load_mrp(path)?;
    check_state("target", target, mrp.num_states())?;
    check_state("start", start, mrp.num_states())?;
    check_gamma(gamma)?;
    if steps == 0 {
        return Err(CliError::Usage("--steps must be at least 1".into()));
    }
    if estimator != EstimatorArg::Td && (k.is_some() || d.is_some()) {
        return Err(CliError::Usage(
            "--k and --d apply only to --estimator td\n\
             usage: estimate <mrp.json> --estimator loop|mb|td --target S \
             --gamma G --steps T --seed N [--k K --d D]"
                .into(),
        ));
    }
    let d = d.unwrap_or(1.0);
    if !(0.5..=1.0).contains(&d) {
        return Err(CliError::Usage(format!("--d must lie in [1/2, 1], got {d}")));
    }

    let path_sample = mrp.simulate(start, steps, seed);
    let estimate = match estimator {
        EstimatorArg::Loop => {
            let mut le = LoopEstimator::new(target, gamma);
            for (state, reward) in path_sample.steps() {
                le.observe(state, reward);
            }
            println!("completed loops = {}", le.loop_count());
            le.estimate()
        }
        EstimatorArg::Mb => {
            let mut mb = ModelBasedEstimator::new(mrp.num_states());
            for t in 0..path_sample.len() {
                match path_sample.states.get(t + 1) {
                    Some(&next) => {
                        mb.observe_transition(path_sample.states[t], path_sample.rewards[t], next)
                    }
                    None => mb.observe_final(path_sample.states[t], path_sample.rewards[t]),
                }
            }
            Some(mb.estimate(gamma).values[target])
        }
        EstimatorArg::Td => {
            let mut td = TdEstimator::new(mrp.num_states(), k.unwrap_or(0), d, gamma);
            for (state, reward) in path_sample.steps() {
                td.observe(state, reward);
            }
            Some(td.estimate(target))
        }
    };
    let exact = mrp
        .exact_values(gamma)
        .expect("gamma already checked")
        .values[target];
    match estimate {
        Some(v) => {
            println!("estimate = {v:?}");
            println!("exact    = {exact:?}");
            println!("abs_error = {:?}", (v - exact).abs());
        }
        None => {
            println!("estimate = none (the path never completed a loop at the target)");
            println!("exact    = {exact:?}");
        }
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_experiment(
    which: &str,
    mode: ModeArg,
    gamma: f64,
    steps: usize,
    runs: usize,
    seed: u64,
    out_dir: &std::path::Path,
    jobs: usize,
    force: bool,
) -> Result<(), CliError> {
    if which != "riverswim" {
        return Err(CliError::Usage(format!(
            "unknown experiment chain '{which}'; only 'riverswim' is built in\n\
             usage: experiment riverswim --mode tau|comparison [--gamma G --steps T \
             --runs R --seed N] --out-dir DIR"
        )));
    }
    check_gamma(gamma)?;
    if steps == 0 || runs == 0 {
        return Err(CliError::Usage("--steps and --runs must be at least 1".into()));
    }
    if jobs == 0 {
        return Err(CliError::Usage("--jobs must be at least 1".into()));
    }

    let mrp = experiments::build_riverswim();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| CliError::Failure(e.to_string()))?;
    let report = match mode {
        ModeArg::Tau => {
            let config = ExperimentConfig::tau(gamma, steps, runs, seed);
            pool.install(|| experiments::run_tau_experiment(&mrp, &config))
        }
        ModeArg::Comparison => {
            let config = ExperimentConfig::comparison(gamma, steps, runs, seed);
            pool.install(|| experiments::run_comparison(&mrp, &config))
        }
    };

    let written = report.write_to_dir(out_dir, force).map_err(|e| match e {
        experiments::ReportWriteError::AlreadyExists(p) => CliError::Failure(format!(
            "output file {} already exists (pass --force to overwrite)",
            p.display()
        )),
        experiments::ReportWriteError::Io(io) => CliError::Failure(io.to_string()),
    })?;
    for file in &written {
        println!("wrote {}", file.display());
    }

    match mode {
        ModeArg::Tau => {
            let fit = report.tau_fit.expect("tau mode always fits");
            println!(
                "fit: mean_error = {:?} * sqrt(tau) + {:?}",
                fit.slope, fit.intercept
            );
            println!("pearson_r = {:?}", fit.pearson_r);
        }
        ModeArg::Comparison => {
            let labels = report.estimator_labels();
            for (i, label) in labels.iter().enumerate() {
                let finals = report.final_errors_for(i);
                println!(
                    "{label}: final mean normalized error = {:?} (std {:?})",
                    mrpeval::stats::mean(&finals),
                    mrpeval::stats::sample_std(&finals)
                );
            }
        }
    }
    Ok(())
}
