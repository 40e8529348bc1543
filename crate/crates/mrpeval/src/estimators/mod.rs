//! Streaming value estimators, each consumable step-by-step over a single
//! sample path.
//!
//! - [`LoopEstimator`]: regenerative estimator for one target state with a
//!   fixed-size (O(1)) state;
//! - [`TdEstimator`]: k-step temporal difference over all states, O(S);
//! - [`ModelBasedEstimator`]: add-1 smoothed maximum-likelihood model plus
//!   an exact solve, O(S²).
//!
//! Estimator states are plain values: update them sequentially on one
//! thread, move them across threads freely, and run independent instances
//! concurrently without coordination.

mod loop_estimator;
mod model_based;
mod td;

pub use loop_estimator::LoopEstimator;
pub use model_based::ModelBasedEstimator;
pub use td::TdEstimator;
