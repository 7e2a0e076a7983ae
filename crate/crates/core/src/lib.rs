//! Monte Carlo selection toolkit.
//!
//! A selection problem asks for the best of `K` alternatives after spending a
//! budget of noisy samples on them; the result is judged only by the quality
//! of the final choice (simple regret). This crate provides:
//!
//! - [`belief`]: per-arm sample statistics, final selection and regret.
//! - [`bounds`]: distribution-free upper bounds on the value of information
//!   (VOI) of sampling one arm `N` more times, via Hoeffding's inequality.
//! - [`policy`]: VOI-driven sampling policies, UCB1 and round-robin
//!   baselines, and the VOI stopping rule.
//! - [`flat`]: a deterministic Bernoulli selection simulator with CSV output.
//! - [`tree`]: hybrid Monte Carlo tree search (VOI at the root, UCT below)
//!   with early stopping and carryover of unused budget between moves.
//! - [`oracle`]: exact reference computations (Beta-Bernoulli metalevel DP,
//!   binomial tails, numeric minimization) used to check the above.
//!
//! All randomness comes from [`rng`], a counter-based stream keyed by
//! `(seed, trial, arm, draw)`, so every result is a pure function of its
//! configuration regardless of thread count.

pub mod belief;
pub mod bounds;
pub mod csv;
pub mod error;
pub mod flat;
pub mod oracle;
pub mod policy;
pub mod rng;
pub mod stats;
pub mod tree;

pub use belief::{best_two, select_final, simple_regret, ArmStats, BeliefState, SelectionProblem};
pub use bounds::{phi, VoiEstimate};
pub use error::{Error, Result};
pub use flat::{ExperimentConfig, ResultRow};
pub use policy::{decide, stop_ratio, PolicyDecision, PolicyKind};
