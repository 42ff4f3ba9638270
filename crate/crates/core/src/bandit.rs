//! Environments, reward draws and budget dynamics.
//!
//! Arms are indexed from zero. Budgets are clamped at zero and ruin is
//! absorbing: once the budget hits zero it stays there.

use rand::Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DistributionKind {
    #[default]
    Normal,
}

/// Reward law of a single arm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArmSpec {
    pub mean: f64,
    pub std_dev: f64,
    #[serde(default)]
    pub distribution: DistributionKind,
}

impl ArmSpec {
    pub fn normal(mean: f64, std_dev: f64) -> Result<Self> {
        let arm = ArmSpec {
            mean,
            std_dev,
            distribution: DistributionKind::Normal,
        };
        arm.validate()?;
        Ok(arm)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.mean.is_finite() {
            return Err(Error::config(format!("arm mean must be finite, got {}", self.mean)));
        }
        if !(self.std_dev.is_finite() && self.std_dev >= 0.0) {
            return Err(Error::config(format!(
                "arm std_dev must be finite and >= 0, got {}",
                self.std_dev
            )));
        }
        Ok(())
    }
}

/// Recipe for drawing a random environment: `mean ~ Unif(mean_low, mean_high)`
/// and `std_dev ~ Gamma(sigma_shape, sigma_rate)` with density
/// `rate^shape / Γ(shape) x^(shape-1) e^(-rate x)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnvironmentSpec {
    pub arm_count: usize,
    pub mean_low: f64,
    pub mean_high: f64,
    pub sigma_shape: f64,
    pub sigma_rate: f64,
}

impl EnvironmentSpec {
    /// Eight normal arms, `Unif(-0.01, 0.01)` means, `Gamma(1, 10)` deviations.
    pub const EIGHT_NORMAL_ARMS: EnvironmentSpec = EnvironmentSpec {
        arm_count: 8,
        mean_low: -0.01,
        mean_high: 0.01,
        sigma_shape: 1.0,
        sigma_rate: 10.0,
    };

    pub fn validate(&self) -> Result<()> {
        if self.arm_count == 0 {
            return Err(Error::config("environment.arm_count must be >= 1"));
        }
        if !(self.mean_low.is_finite() && self.mean_high.is_finite()) {
            return Err(Error::config("environment mean bounds must be finite"));
        }
        if self.mean_low > self.mean_high {
            return Err(Error::config(format!(
                "environment.mean_low ({}) exceeds environment.mean_high ({})",
                self.mean_low, self.mean_high
            )));
        }
        if !(self.sigma_shape.is_finite() && self.sigma_shape > 0.0) {
            return Err(Error::config("environment.sigma_shape must be > 0"));
        }
        if !(self.sigma_rate.is_finite() && self.sigma_rate > 0.0) {
            return Err(Error::config("environment.sigma_rate must be > 0"));
        }
        Ok(())
    }
}

/// A concrete set of arms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Environment {
    pub arms: Vec<ArmSpec>,
}

impl Environment {
    pub fn new(arms: Vec<ArmSpec>) -> Result<Self> {
        let env = Environment { arms };
        env.validate()?;
        Ok(env)
    }

    pub fn validate(&self) -> Result<()> {
        if self.arms.is_empty() {
            return Err(Error::config("environment must contain at least one arm"));
        }
        self.arms.iter().try_for_each(ArmSpec::validate)
    }

    pub fn arm_count(&self) -> usize {
        self.arms.len()
    }
}

/// Where the arms of each run come from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EnvironmentSource {
    /// A fresh environment is sampled for every run.
    Sampled(EnvironmentSpec),
    /// Every run uses the same arms.
    Fixed(Environment),
}

impl EnvironmentSource {
    pub fn validate(&self) -> Result<()> {
        match self {
            EnvironmentSource::Sampled(spec) => spec.validate(),
            EnvironmentSource::Fixed(env) => env.validate(),
        }
    }

    pub fn arm_count(&self) -> usize {
        match self {
            EnvironmentSource::Sampled(spec) => spec.arm_count,
            EnvironmentSource::Fixed(env) => env.arm_count(),
        }
    }

    pub fn instantiate<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Environment> {
        match self {
            EnvironmentSource::Sampled(spec) => sample_environment(spec, rng),
            EnvironmentSource::Fixed(env) => Ok(env.clone()),
        }
    }
}

pub fn sample_environment<R: Rng + ?Sized>(spec: &EnvironmentSpec, rng: &mut R) -> Result<Environment> {
    spec.validate()?;
    // rand_distr parameterizes by scale = 1 / rate.
    let gamma = Gamma::new(spec.sigma_shape, 1.0 / spec.sigma_rate)
        .map_err(|e| Error::config(format!("gamma parameters: {e}")))?;
    let width = spec.mean_high - spec.mean_low;
    let arms = (0..spec.arm_count)
        .map(|_| {
            let u: f64 = rng.random();
            let mean = if width == 0.0 { spec.mean_low } else { spec.mean_low + width * u };
            let std_dev = gamma.sample(rng);
            ArmSpec {
                mean,
                std_dev,
                distribution: DistributionKind::Normal,
            }
        })
        .collect();
    Ok(Environment { arms })
}

pub fn draw_reward<R: Rng + ?Sized>(env: &Environment, arm: usize, rng: &mut R) -> Result<f64> {
    let spec = env.arms.get(arm).ok_or_else(|| {
        Error::usage(format!("arm index {arm} out of range for {} arms", env.arms.len()))
    })?;
    Ok(sample_arm(spec, rng))
}

#[inline]
pub(crate) fn sample_arm<R: Rng + ?Sized>(spec: &ArmSpec, rng: &mut R) -> f64 {
    match spec.distribution {
        DistributionKind::Normal => {
            let z: f64 = StandardNormal.sample(rng);
            spec.mean + spec.std_dev * z
        }
    }
}

/// One step of `b_t = 1{b_{t-1} > 0} max(0, b_{t-1} + r_t)`.
#[inline]
pub fn update_budget(b_prev: f64, reward: f64) -> f64 {
    if b_prev > 0.0 {
        (b_prev + reward).max(0.0)
    } else {
        0.0
    }
}

/// True when the step `b_prev -> b_next` is the ruin event.
#[inline]
pub fn is_ruin_step(b_prev: f64, b_next: f64) -> bool {
    b_prev > 0.0 && b_next == 0.0
}

/// Observed rewards, grouped by arm in pull order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RewardHistory {
    per_arm: Vec<Vec<f64>>,
}

impl RewardHistory {
    pub fn new(arm_count: usize) -> Self {
        RewardHistory {
            per_arm: vec![Vec::new(); arm_count],
        }
    }

    pub fn from_rewards(per_arm: Vec<Vec<f64>>) -> Self {
        RewardHistory { per_arm }
    }

    pub fn arm(&self, arm: usize) -> &[f64] {
        &self.per_arm[arm]
    }

    pub fn arm_count(&self) -> usize {
        self.per_arm.len()
    }

    pub fn push(&mut self, arm: usize, reward: f64) {
        self.per_arm[arm].push(reward);
    }
}

/// State of a single episode.
#[derive(Debug, Clone, PartialEq)]
pub struct RunState {
    initial_budget: f64,
    stage: usize,
    budget: f64,
    ruin_time: Option<usize>,
    pull_counts: Vec<usize>,
    history: RewardHistory,
    budget_trajectory: Vec<f64>,
}

impl RunState {
    pub fn new(arm_count: usize, initial_budget: f64) -> Result<Self> {
        if arm_count == 0 {
            return Err(Error::usage("run state needs at least one arm"));
        }
        if !(initial_budget.is_finite() && initial_budget > 0.0) {
            return Err(Error::usage(format!("initial budget must be > 0, got {initial_budget}")));
        }
        Ok(RunState {
            initial_budget,
            stage: 1,
            budget: initial_budget,
            ruin_time: None,
            pull_counts: vec![0; arm_count],
            history: RewardHistory::new(arm_count),
            budget_trajectory: Vec::new(),
        })
    }

    /// Builds a mid-run state from per-arm histories, as if every listed
    /// reward had been observed without ruin and the budget is now `budget`.
    pub fn from_history(per_arm: Vec<Vec<f64>>, initial_budget: f64, budget: f64) -> Result<Self> {
        if !(budget.is_finite() && budget > 0.0) {
            return Err(Error::usage(format!("budget must be > 0, got {budget}")));
        }
        let mut state = RunState::new(per_arm.len(), initial_budget)?;
        let pulls: usize = per_arm.iter().map(Vec::len).sum();
        state.pull_counts = per_arm.iter().map(Vec::len).collect();
        state.history = RewardHistory::from_rewards(per_arm);
        state.stage = pulls + 1;
        state.budget = budget;
        // Intermediate budgets are unknown; the trajectory only needs the right length.
        state.budget_trajectory = vec![budget; pulls];
        Ok(state)
    }

    /// Current 1-based decision stage.
    pub fn stage(&self) -> usize {
        self.stage
    }

    /// Budget before the reward of the current stage, `b_{t-1}`.
    pub fn budget(&self) -> f64 {
        self.budget
    }

    pub fn initial_budget(&self) -> f64 {
        self.initial_budget
    }

    pub fn is_ruined(&self) -> bool {
        self.ruin_time.is_some()
    }

    pub fn ruin_time(&self) -> Option<usize> {
        self.ruin_time
    }

    pub fn pull_counts(&self) -> &[usize] {
        &self.pull_counts
    }

    pub fn history(&self) -> &RewardHistory {
        &self.history
    }

    pub fn arm_count(&self) -> usize {
        self.pull_counts.len()
    }

    /// Post-update budgets, entry `s - 1` holding `b_s`.
    pub fn budget_trajectory(&self) -> &[f64] {
        &self.budget_trajectory
    }

    /// Applies the reward of pulling `arm` at the current stage and advances.
    pub fn record(&mut self, arm: usize, reward: f64) -> Result<()> {
        if self.is_ruined() {
            return Err(Error::usage("cannot act after ruin"));
        }
        if arm >= self.arm_count() {
            return Err(Error::usage(format!("arm index {arm} out of range")));
        }
        let next = update_budget(self.budget, reward);
        self.pull_counts[arm] += 1;
        self.history.push(arm, reward);
        self.budget_trajectory.push(next);
        if is_ruin_step(self.budget, next) {
            self.ruin_time = Some(self.stage);
        }
        self.budget = next;
        self.stage += 1;
        Ok(())
    }

    /// Pads the trajectory with zeros up to `horizon` stages after ruin.
    pub(crate) fn fill_ruined(&mut self, horizon: usize) {
        if self.is_ruined() && self.budget_trajectory.len() < horizon {
            self.budget_trajectory.resize(horizon, 0.0);
        }
    }

    pub(crate) fn into_parts(self) -> (Vec<f64>, Option<usize>) {
        (self.budget_trajectory, self.ruin_time)
    }
}
