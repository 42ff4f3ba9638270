//! Result files.
//!
//! - `curves.csv`: `policy,lambda,stage,survival_frequency,average_budget`,
//!   one row per policy and stage `1..=T`.
//! - `summary.csv` / `summary.json` / `summary.txt`: stage-`T` metrics per
//!   policy.
//! - `metadata.json`: configuration echo, seed, timing and crate version.
//!
//! `lambda` is empty for the sample-mean policies. Floats are written with
//! Rust's shortest round-trip formatting, so parsing them back is exact.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::harness::{ExperimentConfig, ExperimentResult};

pub const CURVES_FILE: &str = "curves.csv";
pub const SUMMARY_CSV_FILE: &str = "summary.csv";
pub const SUMMARY_JSON_FILE: &str = "summary.json";
pub const SUMMARY_TEXT_FILE: &str = "summary.txt";
pub const METADATA_FILE: &str = "metadata.json";

pub const CURVES_HEADER: &str = "policy,lambda,stage,survival_frequency,average_budget";
pub const SUMMARY_HEADER: &str = "policy,lambda,survival_frequency,average_budget";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub policy: String,
    pub lambda: Option<f64>,
    pub survival_frequency: f64,
    pub average_budget: f64,
    pub survival_std_error: f64,
    pub budget_std_error: f64,
}

pub fn summary_rows(result: &ExperimentResult) -> Vec<SummaryRow> {
    result
        .policies
        .iter()
        .map(|p| SummaryRow {
            policy: p.policy.kind.name().to_string(),
            lambda: p.policy.effective_lambda(),
            survival_frequency: p.summary.survival_frequency,
            average_budget: p.summary.average_budget,
            survival_std_error: p.summary.survival_std_error,
            budget_std_error: p.summary.budget_std_error,
        })
        .collect()
}

fn lambda_field(lambda: Option<f64>) -> String {
    lambda.map(|l| l.to_string()).unwrap_or_default()
}

pub fn curves_csv(result: &ExperimentResult) -> String {
    let mut out = String::new();
    out.push_str(CURVES_HEADER);
    out.push('\n');
    for p in &result.policies {
        let name = p.policy.kind.name();
        let lambda = lambda_field(p.policy.effective_lambda());
        for (i, (s, b)) in p.survival_curve.iter().zip(&p.average_budget_curve).enumerate() {
            let _ = writeln!(out, "{name},{lambda},{},{s},{b}", i + 1);
        }
    }
    out
}

pub fn summary_csv(rows: &[SummaryRow]) -> String {
    let mut out = String::new();
    out.push_str(SUMMARY_HEADER);
    out.push('\n');
    for row in rows {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            row.policy,
            lambda_field(row.lambda),
            row.survival_frequency,
            row.average_budget
        );
    }
    out
}

/// Fixed-width table of the stage-`T` metrics.
pub fn summary_table(rows: &[SummaryRow], horizon: usize) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "Performance metrics at stage T = {horizon}");
    let _ = writeln!(
        out,
        "{:<22} {:>8} {:>18} {:>16}",
        "Policy", "lambda", "Survival Frequency", "Average Budget"
    );
    for row in rows {
        let lambda = row.lambda.map(|l| l.to_string()).unwrap_or_else(|| "-".into());
        let _ = writeln!(
            out,
            "{:<22} {:>8} {:>11.3} ±{:.3} {:>9.3} ±{:.3}",
            row.policy, lambda, row.survival_frequency, row.survival_std_error, row.average_budget, row.budget_std_error
        );
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub command: String,
    pub library_version: String,
    pub master_seed: u64,
    pub threads: Option<usize>,
    pub started_unix_seconds: u64,
    pub wall_clock_seconds: f64,
    /// Complete configuration after overrides; re-running it reproduces the curves.
    pub config: ExperimentConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambdas: Option<Vec<f64>>,
}

/// Paths of the files written for one experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct OutputBundle {
    pub curves: PathBuf,
    pub summary_csv: PathBuf,
    pub summary_json: PathBuf,
    pub summary_text: PathBuf,
    pub metadata: PathBuf,
}

fn write(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

fn json<T: Serialize>(value: &T) -> Result<String> {
    serde_json::to_string_pretty(value).map_err(|e| Error::config(format!("cannot serialize output: {e}")))
}

pub fn write_outputs(out_dir: &Path, result: &ExperimentResult, metadata: &Metadata) -> Result<OutputBundle> {
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let bundle = OutputBundle {
        curves: out_dir.join(CURVES_FILE),
        summary_csv: out_dir.join(SUMMARY_CSV_FILE),
        summary_json: out_dir.join(SUMMARY_JSON_FILE),
        summary_text: out_dir.join(SUMMARY_TEXT_FILE),
        metadata: out_dir.join(METADATA_FILE),
    };
    let rows = summary_rows(result);
    write(&bundle.curves, &curves_csv(result))?;
    write(&bundle.summary_csv, &summary_csv(&rows))?;
    write(&bundle.summary_json, &json(&rows)?)?;
    write(&bundle.summary_text, &summary_table(&rows, result.horizon))?;
    write(&bundle.metadata, &json(metadata)?)?;
    Ok(bundle)
}

pub fn read_metadata(path: impl AsRef<Path>) -> Result<Metadata> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::config(format!("{}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::{PolicyResult, PolicySummary};
    use crate::policies::PolicyConfig;

    fn result() -> ExperimentResult {
        let summary = PolicySummary {
            survival_frequency: 0.5,
            average_budget: 0.1 + 0.2,
            survival_std_error: 0.0,
            budget_std_error: 0.0,
        };
        ExperimentResult {
            runs: 2,
            horizon: 2,
            policies: vec![
                PolicyResult {
                    policy: PolicyConfig::ucb(10.0),
                    survival_curve: vec![1.0, 0.5],
                    average_budget_curve: vec![0.6, 0.1 + 0.2],
                    summary,
                },
                PolicyResult {
                    policy: PolicyConfig::ruin_averse(10.0, 100.0, 5),
                    survival_curve: vec![1.0, 0.5],
                    average_budget_curve: vec![0.6, 0.1 + 0.2],
                    summary,
                },
            ],
        }
    }

    #[test]
    fn curves_layout() {
        let csv = curves_csv(&result());
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], CURVES_HEADER);
        assert_eq!(lines[1], "UCB,,1,1,0.6");
        assert_eq!(lines[2], "UCB,,2,0.5,0.30000000000000004");
        assert_eq!(lines[4], "RuinAverse,100,2,0.5,0.30000000000000004");
        let parsed: f64 = lines[2].rsplit(',').next().unwrap().parse().unwrap();
        assert_eq!(parsed, 0.1 + 0.2);
    }

    #[test]
    fn summary_layout() {
        let rows = summary_rows(&result());
        let csv = summary_csv(&rows);
        assert_eq!(csv.lines().nth(1).unwrap(), "UCB,,0.5,0.30000000000000004");
        assert_eq!(csv.lines().nth(2).unwrap(), "RuinAverse,100,0.5,0.30000000000000004");
        let table = summary_table(&rows, 2);
        assert!(table.contains("RuinAverse"));
        let back: Vec<SummaryRow> = serde_json::from_str(&json(&rows).unwrap()).unwrap();
        assert_eq!(back, rows);
    }
}
