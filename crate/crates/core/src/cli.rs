//! `run` and `sweep` commands.

use std::path::Path;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use crate::config::{load_config, Overrides};
use crate::error::{Error, Result};
use crate::harness::{run_experiment_with, ExperimentConfig, ExperimentResult, RunOptions};
use crate::output::{write_outputs, Metadata, OutputBundle};
use crate::policies::PolicyConfig;

#[derive(Default, Clone, Copy)]
pub struct CommandOptions<'a> {
    pub threads: Option<usize>,
    pub progress: Option<&'a (dyn Fn(usize, usize) + Sync)>,
}

/// Outcome of a command: the files written plus the in-memory results.
#[derive(Debug, Clone)]
pub struct CommandOutput {
    pub bundle: OutputBundle,
    pub result: ExperimentResult,
    pub metadata: Metadata,
}

pub fn cmd_run(config_path: &Path, out_dir: &Path, overrides: &Overrides, options: &CommandOptions<'_>) -> Result<CommandOutput> {
    let mut config = load_config(config_path)?;
    overrides.apply(&mut config)?;
    execute("run", config, None, out_dir, options)
}

pub fn cmd_sweep(
    config_path: &Path,
    lambdas: &[f64],
    out_dir: &Path,
    overrides: &Overrides,
    options: &CommandOptions<'_>,
) -> Result<CommandOutput> {
    let mut config = load_config(config_path)?;
    overrides.apply(&mut config)?;
    config.policies = expand_lambdas(&config.policies, lambdas)?;
    execute("sweep", config, Some(lambdas.to_vec()), out_dir, options)
}

/// Replaces every ruin-averse policy by one copy per lambda, in order,
/// dropping exact duplicates.
pub fn expand_lambdas(policies: &[PolicyConfig], lambdas: &[f64]) -> Result<Vec<PolicyConfig>> {
    if lambdas.is_empty() {
        return Err(Error::config("lambda list must not be empty"));
    }
    if let Some(bad) = lambdas.iter().find(|l| !(l.is_finite() && **l >= 0.0)) {
        return Err(Error::config(format!("lambda values must be >= 0, got {bad}")));
    }
    let mut expanded: Vec<PolicyConfig> = Vec::new();
    for policy in policies {
        let variants: Vec<PolicyConfig> = if policy.kind.is_ruin_averse() {
            lambdas.iter().map(|&lambda| PolicyConfig { lambda, ..*policy }).collect()
        } else {
            vec![*policy]
        };
        for v in variants {
            if !expanded.contains(&v) {
                expanded.push(v);
            }
        }
    }
    Ok(expanded)
}

fn execute(
    command: &str,
    config: ExperimentConfig,
    lambdas: Option<Vec<f64>>,
    out_dir: &Path,
    options: &CommandOptions<'_>,
) -> Result<CommandOutput> {
    let started_unix_seconds = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let clock = Instant::now();
    let run_options = RunOptions {
        threads: options.threads,
        progress: options.progress,
    };
    let (result, _) = run_experiment_with(&config, &run_options)?;
    let metadata = Metadata {
        command: command.to_string(),
        library_version: env!("CARGO_PKG_VERSION").to_string(),
        master_seed: config.master_seed,
        threads: options.threads,
        started_unix_seconds,
        wall_clock_seconds: clock.elapsed().as_secs_f64(),
        config,
        lambdas,
    };
    let bundle = write_outputs(out_dir, &result, &metadata)?;
    Ok(CommandOutput {
        bundle,
        result,
        metadata,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn expansion_replaces_ruin_averse_only() {
        let policies = [
            PolicyConfig::ucb(10.0),
            PolicyConfig::ruin_averse(10.0, 3.0, 10),
            PolicyConfig::ruin_averse_ucb_budget(10.0, 3.0, 10),
        ];
        let lambdas = [0.0, 1.0, 10.0, 100.0, 1000.0];
        let out = expand_lambdas(&policies, &lambdas).unwrap();
        assert_eq!(out.len(), 11);
        assert_eq!(out[0], PolicyConfig::ucb(10.0));
        let ra: Vec<f64> = out
            .iter()
            .filter(|p| p.kind == crate::policies::PolicyKind::RuinAverse)
            .map(|p| p.lambda)
            .collect();
        assert_eq!(ra, lambdas);
    }

    #[test]
    fn expansion_deduplicates_and_validates() {
        let policies = [PolicyConfig::ruin_averse(10.0, 1.0, 10), PolicyConfig::ruin_averse(10.0, 2.0, 10)];
        assert_eq!(expand_lambdas(&policies, &[0.0, 5.0]).unwrap().len(), 2);
        assert!(expand_lambdas(&policies, &[]).is_err());
        assert!(expand_lambdas(&policies, &[-1.0]).is_err());
    }
}
