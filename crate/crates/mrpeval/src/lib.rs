//! Policy evaluation for finite Markov reward processes (MRPs) from a
//! single sample path.
//!
//! The crate provides:
//!
//! - [`mrp`]: MRP construction, validation, exact discounted values via a
//!   direct linear solve, and seeded sample-path simulation;
//! - [`chain`]: expected hitting/recurrence times, closed-form concentration
//!   and error bounds, recovery of transition probabilities from expected
//!   first return times, and a couple of instructive generator chains;
//! - [`estimators`]: three streaming value estimators — the regenerative
//!   loop estimator (O(1) memory per target state), k-step temporal
//!   difference, and the add-1 smoothed model-based estimator;
//! - [`experiments`]: the RiverSwim experiment harness with CSV/JSON
//!   reports;
//! - [`stats`]: small summary-statistics helpers used by the harness.
//!
//! All randomness flows through explicitly seeded ChaCha8 generators, so
//! every simulation and experiment is reproducible bit-for-bit from its
//! seed, on any platform.

pub mod chain;
pub mod estimators;
pub mod experiments;
mod linalg;
pub mod mrp;
pub mod stats;

pub use chain::{ChainError, HittingProfile};
pub use estimators::{LoopEstimator, ModelBasedEstimator, TdEstimator};
pub use experiments::{EstimatorDescriptor, ExperimentConfig, ExperimentReport};
pub use mrp::{LoadError, Mrp, RewardSpec, SamplePath, ValueError, ValueVector, Violation};
