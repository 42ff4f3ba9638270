//! Action-value estimators.
//!
//! [`q_value`] is the plain sample mean of an arm's rewards. The ruin-averse
//! value of committing to an arm for the remaining `H` stages is the
//! expectation of the path payoff
//!
//! ```text
//!   sum of the H rewards     if the budget never hits zero,
//!   -b_prev - lambda         otherwise,
//! ```
//!
//! estimated by resampling the arm's observed rewards with replacement
//! ([`bootstrap_action_value`]) or computed exactly by enumerating every
//! resampled path ([`exact_action_value`]).

use rand::distr::{Distribution, Uniform};
use rand::Rng;

use crate::bandit::update_budget;
use crate::error::{Error, Result};

/// Largest number of leaf paths [`exact_action_value`] will enumerate.
pub const MAX_ENUMERATED_PATHS: u64 = 1_000_000;

pub fn q_value(arm_rewards: &[f64]) -> Result<f64> {
    if arm_rewards.is_empty() {
        return Err(Error::usage("q_value needs at least one observed reward"));
    }
    Ok(arm_rewards.iter().sum::<f64>() / arm_rewards.len() as f64)
}

/// Inputs to a ruin-averse action-value estimate for one arm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimatorInput<'a> {
    pub arm_rewards: &'a [f64],
    /// Budget before the current stage, `b_{t-1}`.
    pub budget: f64,
    /// Remaining stages including the current one, `T - t + 1`.
    pub horizon: usize,
    pub lambda: f64,
    pub paths: usize,
}

impl<'a> EstimatorInput<'a> {
    pub fn new(arm_rewards: &'a [f64], budget: f64, horizon: usize, lambda: f64, paths: usize) -> Result<Self> {
        let input = EstimatorInput {
            arm_rewards,
            budget,
            horizon,
            lambda,
            paths,
        };
        input.validate()?;
        Ok(input)
    }

    pub fn validate(&self) -> Result<()> {
        if self.arm_rewards.is_empty() {
            return Err(Error::usage("arm must have been pulled at least once"));
        }
        if !(self.budget.is_finite() && self.budget > 0.0) {
            return Err(Error::usage(format!("budget must be > 0, got {}", self.budget)));
        }
        if self.horizon == 0 {
            return Err(Error::usage("remaining horizon must be >= 1"));
        }
        if !(self.lambda.is_finite() && self.lambda >= 0.0) {
            return Err(Error::usage(format!("lambda must be >= 0, got {}", self.lambda)));
        }
        if self.paths == 0 {
            return Err(Error::usage("path count must be >= 1"));
        }
        Ok(())
    }

    /// Payoff of a ruined path.
    pub fn ruin_payoff(&self) -> f64 {
        -self.budget - self.lambda
    }
}

/// Result of simulating one bootstrap path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PathOutcome {
    /// The budget hit zero after `steps` draws.
    Ruined { steps: usize },
    Survived { reward_sum: f64 },
}

impl PathOutcome {
    pub fn is_ruined(&self) -> bool {
        matches!(self, PathOutcome::Ruined { .. })
    }

    pub fn payoff(&self, budget: f64, lambda: f64) -> f64 {
        match *self {
            PathOutcome::Ruined { .. } => -budget - lambda,
            PathOutcome::Survived { reward_sum } => reward_sum,
        }
    }

    /// Number of rewards actually drawn.
    pub fn steps(&self, horizon: usize) -> usize {
        match *self {
            PathOutcome::Ruined { steps } => steps,
            PathOutcome::Survived { .. } => horizon,
        }
    }
}

/// Draws up to `horizon` rewards with replacement from `arm_rewards`,
/// stopping at ruin.
pub fn simulate_path<R: Rng + ?Sized>(arm_rewards: &[f64], budget: f64, horizon: usize, rng: &mut R) -> Result<PathOutcome> {
    EstimatorInput::new(arm_rewards, budget, horizon, 0.0, 1)?;
    let index = Uniform::new(0, arm_rewards.len()).map_err(|e| Error::usage(e.to_string()))?;
    Ok(resample_path(arm_rewards, &index, budget, horizon, rng))
}

#[inline]
fn resample_path<R: Rng + ?Sized>(
    arm_rewards: &[f64],
    index: &Uniform<usize>,
    budget: f64,
    horizon: usize,
    rng: &mut R,
) -> PathOutcome {
    let mut b = budget;
    let mut sum = 0.0;
    for step in 1..=horizon {
        let r = arm_rewards[index.sample(rng)];
        b = update_budget(b, r);
        if b == 0.0 {
            return PathOutcome::Ruined { steps: step };
        }
        sum += r;
    }
    PathOutcome::Survived { reward_sum: sum }
}

/// Summary of one bootstrap estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BootstrapEstimate {
    /// Mean path payoff.
    pub value: f64,
    pub ruined_fraction: f64,
    /// Average number of rewards drawn per path.
    pub mean_path_length: f64,
    /// Sample standard deviation of the path payoffs (zero when `paths == 1`).
    pub payoff_std_dev: f64,
    pub paths: usize,
}

impl BootstrapEstimate {
    pub fn std_error(&self) -> f64 {
        self.payoff_std_dev / (self.paths as f64).sqrt()
    }
}

pub fn bootstrap_estimate<R: Rng + ?Sized>(input: &EstimatorInput<'_>, rng: &mut R) -> Result<BootstrapEstimate> {
    input.validate()?;
    let index = Uniform::new(0, input.arm_rewards.len()).map_err(|e| Error::usage(e.to_string()))?;
    let ruin_payoff = input.ruin_payoff();
    let mut total = 0.0;
    let mut total_sq = 0.0;
    let mut ruined = 0usize;
    let mut steps = 0usize;
    for _ in 0..input.paths {
        let outcome = resample_path(input.arm_rewards, &index, input.budget, input.horizon, rng);
        let payoff = match outcome {
            PathOutcome::Ruined { steps: s } => {
                ruined += 1;
                steps += s;
                ruin_payoff
            }
            PathOutcome::Survived { reward_sum } => {
                steps += input.horizon;
                reward_sum
            }
        };
        total += payoff;
        total_sq += payoff * payoff;
    }
    let m = input.paths as f64;
    let value = total / m;
    let payoff_std_dev = if input.paths > 1 {
        ((total_sq - m * value * value).max(0.0) / (m - 1.0)).sqrt()
    } else {
        0.0
    };
    Ok(BootstrapEstimate {
        value,
        ruined_fraction: ruined as f64 / m,
        mean_path_length: steps as f64 / m,
        payoff_std_dev,
        paths: input.paths,
    })
}

/// Mean payoff over `input.paths` resampled paths.
pub fn bootstrap_action_value<R: Rng + ?Sized>(input: &EstimatorInput<'_>, rng: &mut R) -> Result<f64> {
    bootstrap_estimate(input, rng).map(|e| e.value)
}

/// Exact expected path payoff under uniform resampling, by enumerating
/// all `|arm_rewards|^horizon` paths. Subtrees below a ruin are collapsed
/// since their payoff no longer depends on later draws.
pub fn exact_action_value(arm_rewards: &[f64], budget: f64, horizon: usize, lambda: f64) -> Result<f64> {
    let input = EstimatorInput::new(arm_rewards, budget, horizon, lambda, 1)?;
    let n = arm_rewards.len() as u64;
    let leaves = u32::try_from(horizon)
        .ok()
        .and_then(|h| n.checked_pow(h))
        .filter(|&count| count <= MAX_ENUMERATED_PATHS);
    if leaves.is_none() {
        return Err(Error::usage(format!(
            "{n}^{horizon} paths exceeds the enumeration cap of {MAX_ENUMERATED_PATHS}"
        )));
    }

    fn descend(rewards: &[f64], b: f64, sum: f64, remaining: usize, weight: f64, ruin_payoff: f64) -> f64 {
        if remaining == 0 {
            return weight * sum;
        }
        let child_weight = weight / rewards.len() as f64;
        rewards
            .iter()
            .map(|&r| {
                let next = update_budget(b, r);
                if next == 0.0 {
                    child_weight * ruin_payoff
                } else {
                    descend(rewards, next, sum + r, remaining - 1, child_weight, ruin_payoff)
                }
            })
            .sum()
    }

    Ok(descend(arm_rewards, budget, 0.0, horizon, 1.0, input.ruin_payoff()))
}
