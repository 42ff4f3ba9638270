//! Survival multi-armed bandits.
//!
//! An agent pulls one of `K` arms per stage; each reward is added to a
//! finite budget and the process is absorbed (ruined) as soon as the budget
//! reaches zero. This crate provides:
//!
//! - [`bandit`]: environments, reward draws and the clamped budget recursion.
//! - [`estimators`]: the sample-mean value and the bootstrapped ruin-averse
//!   action value, plus an exhaustive enumeration oracle for the latter.
//! - [`policies`]: `UCB`, `UCBBudget`, `RuinAverse` and `RuinAverseUCBBudget`.
//! - [`harness`]: seeded episodes and Monte Carlo experiments producing
//!   survival-frequency and average-budget curves.
//! - [`config`], [`output`] and [`cli`]: the command-line front end.

pub mod bandit;
pub mod cli;
pub mod config;
pub mod error;
pub mod estimators;
pub mod harness;
pub mod output;
pub mod policies;
pub mod seed;

pub use error::{Error, Result};

/// Random source used throughout the crate. Portable and reproducible
/// across platforms for a given seed.
pub type SimRng = rand_xoshiro::Xoshiro256PlusPlus;

/// Builds a [`SimRng`] from a 64-bit seed.
pub fn rng_from_seed(seed: u64) -> SimRng {
    use rand::SeedableRng;
    SimRng::seed_from_u64(seed)
}
