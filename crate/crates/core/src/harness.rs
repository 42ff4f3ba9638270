//! Episodes and Monte Carlo experiments.
//!
//! Runs are the unit of parallelism. Each run derives its own seeds from the
//! master seed (see [`crate::seed`]) and per-run traces are reduced in run
//! order, so results are bit-identical whether runs execute serially or on
//! any number of threads.

use std::sync::atomic::{AtomicUsize, Ordering};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bandit::{sample_arm, Environment, EnvironmentSource, EnvironmentSpec, RunState};
use crate::error::{Error, Result};
use crate::policies::{select_action, PolicyConfig};
use crate::seed::{private_environment_seed, seed_schedule, StreamPurpose};
use crate::{rng_from_seed, SimRng};

fn default_shared() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub environment: EnvironmentSource,
    pub policies: Vec<PolicyConfig>,
    pub runs: usize,
    pub horizon: usize,
    pub initial_budget: f64,
    pub master_seed: u64,
    /// Use the same sampled environment for every policy within a run.
    #[serde(default = "default_shared")]
    pub shared_environments: bool,
}

impl ExperimentConfig {
    /// Eight random normal arms, `T = 500`, `b0 = 0.5`, `alpha = 10`, `M = 100`,
    /// both baselines and both ruin-averse kinds for each
    /// `lambda in {0, 1, 10, 100, 1000}`, over 1000 runs.
    pub fn reference(master_seed: u64) -> Self {
        let lambdas = [0.0, 1.0, 10.0, 100.0, 1000.0];
        let alpha = 10.0;
        let paths = 100;
        let mut policies = vec![PolicyConfig::ucb(alpha), PolicyConfig::ucb_budget(alpha)];
        policies.extend(lambdas.iter().map(|&l| PolicyConfig::ruin_averse(alpha, l, paths)));
        policies.extend(lambdas.iter().map(|&l| PolicyConfig::ruin_averse_ucb_budget(alpha, l, paths)));
        ExperimentConfig {
            environment: EnvironmentSource::Sampled(EnvironmentSpec::EIGHT_NORMAL_ARMS),
            policies,
            runs: 1000,
            horizon: 500,
            initial_budget: 0.5,
            master_seed,
            shared_environments: true,
        }
    }

    /// Reduced scale for routine checks: 200 runs, 50 bootstrap paths.
    pub fn apply_smoke(&mut self) {
        self.runs = 200;
        self.horizon = 500;
        self.set_paths(50);
    }

    pub fn set_paths(&mut self, paths: usize) {
        self.policies.iter_mut().for_each(|p| p.paths = paths);
    }

    pub fn set_alpha(&mut self, alpha: f64) {
        self.policies.iter_mut().for_each(|p| p.alpha = alpha);
    }

    pub fn validate(&self) -> Result<()> {
        self.environment.validate()?;
        if self.policies.is_empty() {
            return Err(Error::config("at least one policy is required"));
        }
        for (i, p) in self.policies.iter().enumerate() {
            p.validate()
                .map_err(|e| Error::config(format!("policies[{i}]: {e}")))?;
        }
        if self.runs == 0 {
            return Err(Error::config("runs must be >= 1"));
        }
        if self.horizon == 0 {
            return Err(Error::config("horizon must be >= 1"));
        }
        if !(self.initial_budget.is_finite() && self.initial_budget > 0.0) {
            return Err(Error::config(format!(
                "initial_budget must be > 0, got {}",
                self.initial_budget
            )));
        }
        Ok(())
    }
}

/// Everything that happened in one episode.
#[derive(Debug, Clone, PartialEq)]
pub struct RunTrace {
    /// `b_1, ..., b_T`.
    pub budget_trajectory: Vec<f64>,
    pub ruin_time: Option<usize>,
    /// Arm pulled at each stage until ruin or the horizon.
    pub actions: Vec<usize>,
    /// Reward observed at each stage, aligned with `actions`.
    pub rewards: Vec<f64>,
    pub final_budget: f64,
}

impl RunTrace {
    /// True when the run is still alive after `stage`.
    pub fn survives(&self, stage: usize) -> bool {
        self.ruin_time.is_none_or(|tau| tau > stage)
    }
}

/// Plays `policy` on `env` for up to `horizon` stages starting from
/// `initial_budget`. Rewards come from `reward_rng`; bootstrap resampling
/// and tie-breaking use `policy_rng`.
pub fn run_episode(
    env: &Environment,
    policy: &PolicyConfig,
    initial_budget: f64,
    horizon: usize,
    reward_rng: &mut SimRng,
    policy_rng: &mut SimRng,
) -> Result<RunTrace> {
    env.validate()?;
    policy.validate()?;
    let mut state = RunState::new(env.arm_count(), initial_budget)?;
    let mut actions = Vec::with_capacity(horizon);
    let mut rewards = Vec::with_capacity(horizon);
    while state.stage() <= horizon && !state.is_ruined() {
        let arm = select_action(policy, &state, horizon, policy_rng)?;
        let reward = sample_arm(&env.arms[arm], reward_rng);
        state.record(arm, reward)?;
        actions.push(arm);
        rewards.push(reward);
    }
    state.fill_ruined(horizon);
    let (budget_trajectory, ruin_time) = state.into_parts();
    let final_budget = budget_trajectory.last().copied().unwrap_or(initial_budget);
    Ok(RunTrace {
        budget_trajectory,
        ruin_time,
        actions,
        rewards,
        final_budget,
    })
}

/// Stage-`T` metrics of one policy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolicySummary {
    pub survival_frequency: f64,
    pub average_budget: f64,
    pub survival_std_error: f64,
    pub budget_std_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicyResult {
    pub policy: PolicyConfig,
    /// `S(t)`: fraction of runs with ruin time greater than `t`, for `t = 1..=T`.
    pub survival_curve: Vec<f64>,
    /// Mean budget at each stage, ruined runs counting as zero.
    pub average_budget_curve: Vec<f64>,
    pub summary: PolicySummary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub runs: usize,
    pub horizon: usize,
    pub policies: Vec<PolicyResult>,
}

impl ExperimentResult {
    /// Looks a policy up by identity; parameters its kind ignores (lambda and
    /// paths for the sample-mean kinds) do not have to match.
    pub fn find(&self, policy: &PolicyConfig) -> Option<&PolicyResult> {
        let key = policy.stream_key();
        self.policies.iter().find(|p| p.policy.stream_key() == key)
    }
}

/// Traces of every run, indexed `[run][policy]`.
pub type RunTraces = Vec<Vec<RunTrace>>;

type ProgressFn<'a> = dyn Fn(usize, usize) + Sync + 'a;

#[derive(Default, Clone, Copy)]
pub struct RunOptions<'a> {
    /// Worker threads. `None` uses the global rayon pool, `Some(1)` runs
    /// serially on the calling thread.
    pub threads: Option<usize>,
    /// Called with `(completed_runs, total_runs)` after every run.
    pub progress: Option<&'a ProgressFn<'a>>,
}

pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentResult> {
    run_experiment_with(config, &RunOptions::default()).map(|(result, _)| result)
}

/// Runs the experiment and also returns every trace.
pub fn run_experiment_with(config: &ExperimentConfig, options: &RunOptions<'_>) -> Result<(ExperimentResult, RunTraces)> {
    config.validate()?;
    let done = AtomicUsize::new(0);
    let one_run = |run: usize| -> Result<Vec<RunTrace>> {
        let traces = simulate_run(config, run)?;
        if let Some(progress) = options.progress {
            progress(done.fetch_add(1, Ordering::Relaxed) + 1, config.runs);
        }
        Ok(traces)
    };

    let traces: Result<RunTraces> = match options.threads {
        Some(0) => return Err(Error::config("threads must be >= 1")),
        Some(1) => (0..config.runs).map(one_run).collect(),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::config(format!("thread pool: {e}")))?
            .install(|| (0..config.runs).into_par_iter().map(one_run).collect()),
        None => (0..config.runs).into_par_iter().map(one_run).collect(),
    };
    let traces = traces?;
    let result = aggregate(config, &traces);
    Ok((result, traces))
}

/// All policies on run `run`.
pub fn simulate_run(config: &ExperimentConfig, run: usize) -> Result<Vec<RunTrace>> {
    let run_index = run as u64;
    let shared = if config.shared_environments {
        let seed = seed_schedule(config.master_seed, run_index, 0, StreamPurpose::Environment);
        Some(config.environment.instantiate(&mut rng_from_seed(seed))?)
    } else {
        None
    };
    config
        .policies
        .iter()
        .map(|policy| {
            let key = policy.stream_key();
            let private;
            let env = match &shared {
                Some(env) => env,
                None => {
                    let seed = private_environment_seed(config.master_seed, run_index, key);
                    private = config.environment.instantiate(&mut rng_from_seed(seed))?;
                    &private
                }
            };
            let mut reward_rng = rng_from_seed(seed_schedule(config.master_seed, run_index, key, StreamPurpose::Rewards));
            let mut policy_rng = rng_from_seed(seed_schedule(config.master_seed, run_index, key, StreamPurpose::PolicyRng));
            run_episode(env, policy, config.initial_budget, config.horizon, &mut reward_rng, &mut policy_rng)
        })
        .collect()
}

/// Reduces traces into curves, summing over runs in index order.
pub fn aggregate(config: &ExperimentConfig, traces: &RunTraces) -> ExperimentResult {
    let horizon = config.horizon;
    let runs = traces.len();
    let n = runs as f64;
    let policies = config
        .policies
        .iter()
        .enumerate()
        .map(|(p, policy)| {
            let mut alive = vec![0usize; horizon];
            let mut budget_sum = vec![0.0f64; horizon];
            for run in traces {
                let trace = &run[p];
                for stage in 0..horizon {
                    if trace.survives(stage + 1) {
                        alive[stage] += 1;
                    }
                    budget_sum[stage] += trace.budget_trajectory[stage];
                }
            }
            let survival_curve: Vec<f64> = alive.iter().map(|&a| a as f64 / n).collect();
            let average_budget_curve: Vec<f64> = budget_sum.iter().map(|&s| s / n).collect();
            let survival_frequency = survival_curve[horizon - 1];
            let average_budget = average_budget_curve[horizon - 1];
            let budget_var = if runs > 1 {
                traces
                    .iter()
                    .map(|run| (run[p].final_budget - average_budget).powi(2))
                    .sum::<f64>()
                    / (n - 1.0)
            } else {
                0.0
            };
            PolicyResult {
                policy: *policy,
                summary: PolicySummary {
                    survival_frequency,
                    average_budget,
                    survival_std_error: (survival_frequency * (1.0 - survival_frequency) / n).sqrt(),
                    budget_std_error: (budget_var / n).sqrt(),
                },
                survival_curve,
                average_budget_curve,
            }
        })
        .collect();
    ExperimentResult {
        runs,
        horizon,
        policies,
    }
}
