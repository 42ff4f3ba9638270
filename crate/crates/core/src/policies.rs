//! Action-selection rules.
//!
//! Every policy scores arm `k` as `value_k + bonus_k` and pulls an argmax:
//!
//! | kind                  | value                      | bonus                       |
//! |-----------------------|----------------------------|-----------------------------|
//! | `UCB`                 | sample mean                | `sqrt(alpha ln t / N_k)`     |
//! | `UCBBudget`           | sample mean                | `sqrt(alpha ln(b + 1) / N_k)`|
//! | `RuinAverse`          | bootstrap ruin-averse value| `sqrt(alpha ln t / N_k)`     |
//! | `RuinAverseUCBBudget` | bootstrap ruin-averse value| `sqrt(alpha ln(b + 1) / N_k)`|
//!
//! Arms never pulled are played first, lowest index first. `b` is the budget
//! before the current stage's reward.

use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::bandit::RunState;
use crate::error::{Error, Result};
use crate::estimators::{bootstrap_action_value, q_value, EstimatorInput};
use crate::seed::mix64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolicyKind {
    Ucb,
    UcbBudget,
    RuinAverse,
    RuinAverseUcbBudget,
}

impl PolicyKind {
    pub const ALL: [PolicyKind; 4] = [
        PolicyKind::Ucb,
        PolicyKind::UcbBudget,
        PolicyKind::RuinAverse,
        PolicyKind::RuinAverseUcbBudget,
    ];

    pub fn is_ruin_averse(self) -> bool {
        matches!(self, PolicyKind::RuinAverse | PolicyKind::RuinAverseUcbBudget)
    }

    pub fn uses_budget_bonus(self) -> bool {
        matches!(self, PolicyKind::UcbBudget | PolicyKind::RuinAverseUcbBudget)
    }

    /// The kind with the same bonus but sample-mean values.
    pub fn baseline(self) -> PolicyKind {
        if self.uses_budget_bonus() {
            PolicyKind::UcbBudget
        } else {
            PolicyKind::Ucb
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            PolicyKind::Ucb => "UCB",
            PolicyKind::UcbBudget => "UCBBudget",
            PolicyKind::RuinAverse => "RuinAverse",
            PolicyKind::RuinAverseUcbBudget => "RuinAverseUCBBudget",
        }
    }

    fn tag(self) -> u64 {
        match self {
            PolicyKind::Ucb => 1,
            PolicyKind::UcbBudget => 2,
            PolicyKind::RuinAverse => 3,
            PolicyKind::RuinAverseUcbBudget => 4,
        }
    }
}

impl fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

pub const DEFAULT_ALPHA: f64 = 10.0;
pub const DEFAULT_PATHS: usize = 100;

fn default_alpha() -> f64 {
    DEFAULT_ALPHA
}

fn default_paths() -> usize {
    DEFAULT_PATHS
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolicyConfig {
    pub kind: PolicyKind,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    /// Ruin aversion. Ignored by the sample-mean kinds.
    #[serde(default)]
    pub lambda: f64,
    /// Bootstrap paths per arm and stage. Ignored by the sample-mean kinds.
    #[serde(default = "default_paths")]
    pub paths: usize,
}

impl PolicyConfig {
    pub fn new(kind: PolicyKind, alpha: f64, lambda: f64, paths: usize) -> Result<Self> {
        let config = PolicyConfig {
            kind,
            alpha,
            lambda,
            paths,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn ucb(alpha: f64) -> Self {
        PolicyConfig {
            kind: PolicyKind::Ucb,
            alpha,
            lambda: 0.0,
            paths: DEFAULT_PATHS,
        }
    }

    pub fn ucb_budget(alpha: f64) -> Self {
        PolicyConfig {
            kind: PolicyKind::UcbBudget,
            ..PolicyConfig::ucb(alpha)
        }
    }

    pub fn ruin_averse(alpha: f64, lambda: f64, paths: usize) -> Self {
        PolicyConfig {
            kind: PolicyKind::RuinAverse,
            alpha,
            lambda,
            paths,
        }
    }

    pub fn ruin_averse_ucb_budget(alpha: f64, lambda: f64, paths: usize) -> Self {
        PolicyConfig {
            kind: PolicyKind::RuinAverseUcbBudget,
            alpha,
            lambda,
            paths,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha.is_finite() && self.alpha > 0.0) {
            return Err(Error::config(format!("policy alpha must be > 0, got {}", self.alpha)));
        }
        if self.kind.is_ruin_averse() {
            if !(self.lambda.is_finite() && self.lambda >= 0.0) {
                return Err(Error::config(format!("policy lambda must be >= 0, got {}", self.lambda)));
            }
            if self.paths == 0 {
                return Err(Error::config("policy paths must be >= 1"));
            }
        }
        Ok(())
    }

    /// Lambda when it matters for this kind.
    pub fn effective_lambda(&self) -> Option<f64> {
        self.kind.is_ruin_averse().then_some(self.lambda)
    }

    /// Stable identity of the policy's behavior: equal for configurations
    /// that act identically, independent of position in any list. Fields a
    /// kind ignores do not contribute.
    pub fn stream_key(&self) -> u64 {
        let mut key = mix64(self.kind.tag());
        key = mix64(key ^ self.alpha.to_bits());
        if self.kind.is_ruin_averse() {
            // -0.0 and 0.0 behave identically
            let lambda = if self.lambda == 0.0 { 0.0f64 } else { self.lambda };
            key = mix64(key ^ lambda.to_bits());
            key = mix64(key ^ self.paths as u64);
        }
        key
    }

    pub fn label(&self) -> String {
        match self.effective_lambda() {
            Some(lambda) => format!("{}(lambda={})", self.kind, lambda),
            None => self.kind.to_string(),
        }
    }
}

/// `sqrt(alpha ln(t) / n)`.
pub fn ucb_bonus(alpha: f64, stage: f64, pulls: usize) -> f64 {
    (alpha * stage.ln() / pulls as f64).sqrt()
}

/// `sqrt(alpha ln(b + 1) / n)`.
pub fn budget_bonus(alpha: f64, budget: f64, pulls: usize) -> f64 {
    (alpha * budget.ln_1p() / pulls as f64).sqrt()
}

/// Per-arm scores behind one decision.
#[derive(Debug, Clone, PartialEq)]
pub struct ActionScores {
    /// Value estimates; empty when the choice was a forced initial pull.
    pub values: Vec<f64>,
    /// Exploration bonuses; empty when the choice was a forced initial pull.
    pub bonuses: Vec<f64>,
    pub chosen: usize,
}

impl ActionScores {
    pub fn is_forced(&self) -> bool {
        self.values.is_empty()
    }

    pub fn totals(&self) -> Vec<f64> {
        self.values.iter().zip(&self.bonuses).map(|(v, b)| v + b).collect()
    }
}

/// Index of a maximal score; exact ties resolved uniformly at random.
/// The random source is only touched when there is a tie.
pub fn argmax_random_tie<R: Rng + ?Sized>(scores: &[f64], rng: &mut R) -> Option<usize> {
    let best = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut ties = scores
        .iter()
        .enumerate()
        .filter(|&(_, &s)| s == best)
        .map(|(i, _)| i);
    let first = ties.next()?;
    let rest: Vec<usize> = ties.collect();
    if rest.is_empty() {
        return Some(first);
    }
    let pick = rng.random_range(0..=rest.len());
    Some(if pick == 0 { first } else { rest[pick - 1] })
}

pub fn score_actions<R: Rng + ?Sized>(
    config: &PolicyConfig,
    state: &RunState,
    horizon: usize,
    rng: &mut R,
) -> Result<ActionScores> {
    if state.is_ruined() {
        return Err(Error::usage("cannot select an action after ruin"));
    }
    let stage = state.stage();
    if stage > horizon {
        return Err(Error::usage(format!("stage {stage} is past the horizon {horizon}")));
    }
    if let Some(unpulled) = state.pull_counts().iter().position(|&n| n == 0) {
        return Ok(ActionScores {
            values: Vec::new(),
            bonuses: Vec::new(),
            chosen: unpulled,
        });
    }

    let budget = state.budget();
    let remaining = horizon - stage + 1;
    let history = state.history();
    let arm_count = state.arm_count();
    let mut values = Vec::with_capacity(arm_count);
    let mut bonuses = Vec::with_capacity(arm_count);
    for (arm, &pulls) in state.pull_counts().iter().enumerate() {
        let rewards = history.arm(arm);
        let value = if config.kind.is_ruin_averse() {
            let input = EstimatorInput::new(rewards, budget, remaining, config.lambda, config.paths)?;
            bootstrap_action_value(&input, rng)?
        } else {
            q_value(rewards)?
        };
        let bonus = if config.kind.uses_budget_bonus() {
            budget_bonus(config.alpha, budget, pulls)
        } else {
            ucb_bonus(config.alpha, stage as f64, pulls)
        };
        values.push(value);
        bonuses.push(bonus);
    }
    let totals: Vec<f64> = values.iter().zip(&bonuses).map(|(v, b)| v + b).collect();
    let chosen = argmax_random_tie(&totals, rng).ok_or_else(|| Error::usage("no arms to choose from"))?;
    Ok(ActionScores {
        values,
        bonuses,
        chosen,
    })
}

pub fn select_action<R: Rng + ?Sized>(
    config: &PolicyConfig,
    state: &RunState,
    horizon: usize,
    rng: &mut R,
) -> Result<usize> {
    score_actions(config, state, horizon, rng).map(|s| s.chosen)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimators::exact_action_value;
    use crate::rng_from_seed;
    use proptest::prelude::*;
    use std::f64::consts::E;

    #[test]
    fn ucb_bonus_examples() {
        assert_eq!(ucb_bonus(10.0, 1.0, 1), 0.0);
        assert!((ucb_bonus(10.0, E, 10) - 1.0).abs() < 1e-15);
        // sqrt(2 ln 100) = 3.03485425877029270172... (50-digit mpmath evaluation)
        assert!((ucb_bonus(10.0, 100.0, 5) - 3.034_854_258_770_293).abs() < 1e-14);
    }

    #[test]
    fn budget_bonus_examples() {
        assert_eq!(budget_bonus(10.0, 0.0, 4), 0.0);
        assert!((budget_bonus(10.0, E - 1.0, 10) - 1.0).abs() < 1e-15);
        // sqrt(2 ln 2.5) = 1.35372872605567107038... (50-digit mpmath evaluation)
        assert!((budget_bonus(10.0, 1.5, 5) - 1.353_728_726_055_671).abs() < 1e-14);
    }

    #[test]
    fn forced_initialization_picks_lowest_unpulled() {
        let state = RunState::from_history(vec![vec![5.0], vec![], vec![1.0, 2.0]], 0.5, 1.0).unwrap();
        assert_eq!(state.stage(), 4);
        let mut rng = rng_from_seed(0);
        for kind in PolicyKind::ALL {
            let config = PolicyConfig::new(kind, 10.0, 1.0, 10).unwrap();
            let scores = score_actions(&config, &state, 10, &mut rng).unwrap();
            assert!(scores.is_forced());
            assert_eq!(scores.chosen, 1);
        }
    }

    #[test]
    fn ucb_equal_bonuses_cancel() {
        let state = RunState::from_history(vec![vec![1.0], vec![0.0]], 0.5, 1.5).unwrap();
        assert_eq!(state.stage(), 3);
        let scores = score_actions(&PolicyConfig::ucb(10.0), &state, 10, &mut rng_from_seed(1)).unwrap();
        let bonus = (10.0f64 * 3.0f64.ln()).sqrt();
        assert_eq!(scores.bonuses, vec![bonus, bonus]);
        assert_eq!(scores.chosen, 0);
    }

    #[test]
    fn ruin_averse_avoids_certain_ruin() {
        let state = RunState::from_history(vec![vec![-0.6], vec![0.05]], 0.5, 0.5).unwrap();
        for horizon in [3, 10, 40] {
            let config = PolicyConfig::ruin_averse(10.0, 10.0, 20);
            let scores = score_actions(&config, &state, horizon, &mut rng_from_seed(2)).unwrap();
            let remaining = horizon - state.stage() + 1;
            let exact = exact_action_value(&[-0.6], 0.5, remaining, 10.0).unwrap();
            assert_eq!(exact, -10.5);
            assert_eq!(scores.values[0], -10.5);
            assert!(scores.values[1] >= 0.0);
            assert_eq!(scores.chosen, 1);
        }
    }

    #[test]
    fn ruined_state_is_rejected() {
        let mut state = RunState::new(2, 0.5).unwrap();
        state.record(0, -1.0).unwrap();
        assert!(matches!(
            select_action(&PolicyConfig::ucb(10.0), &state, 10, &mut rng_from_seed(0)),
            Err(Error::Usage(_))
        ));
    }

    #[test]
    fn past_horizon_is_rejected() {
        let state = RunState::from_history(vec![vec![0.1], vec![0.1]], 0.5, 0.7).unwrap();
        assert!(select_action(&PolicyConfig::ucb(10.0), &state, 2, &mut rng_from_seed(0)).is_err());
    }

    #[test]
    fn ties_are_uniform() {
        let mut rng = rng_from_seed(7);
        let scores = [1.0, 3.0, 3.0, 0.0, 3.0];
        let mut counts = [0usize; 5];
        let n = 30_000;
        for _ in 0..n {
            counts[argmax_random_tie(&scores, &mut rng).unwrap()] += 1;
        }
        assert_eq!(counts[0] + counts[3], 0);
        for &c in &[counts[1], counts[2], counts[4]] {
            let p = c as f64 / n as f64;
            assert!((p - 1.0 / 3.0).abs() < 0.02, "{counts:?}");
        }
        assert_eq!(argmax_random_tie(&[], &mut rng), None);
    }

    #[test]
    fn stream_key_ignores_unused_fields() {
        let a = PolicyConfig { lambda: 5.0, paths: 3, ..PolicyConfig::ucb(10.0) };
        assert_eq!(a.stream_key(), PolicyConfig::ucb(10.0).stream_key());
        assert_ne!(PolicyConfig::ucb(10.0).stream_key(), PolicyConfig::ucb_budget(10.0).stream_key());
        assert_ne!(
            PolicyConfig::ruin_averse(10.0, 1.0, 100).stream_key(),
            PolicyConfig::ruin_averse(10.0, 10.0, 100).stream_key()
        );
    }

    #[test]
    fn invalid_configs() {
        assert!(PolicyConfig::new(PolicyKind::Ucb, 0.0, 0.0, 1).is_err());
        assert!(PolicyConfig::new(PolicyKind::RuinAverse, 1.0, -1.0, 1).is_err());
        assert!(PolicyConfig::new(PolicyKind::RuinAverse, 1.0, 1.0, 0).is_err());
        assert!(PolicyConfig::new(PolicyKind::Ucb, 1.0, -1.0, 0).is_ok());
    }

    proptest! {
        #[test]
        fn argmax_translation_invariant(
            eighths in proptest::collection::vec(-16i32..16, 1..8),
            seed in any::<u64>(),
        ) {
            // Dyadic scores stay exact under the shift, so tie sets are preserved.
            let scores: Vec<f64> = eighths.iter().map(|&e| e as f64 / 8.0).collect();
            let shifted: Vec<f64> = scores.iter().map(|s| s + 4.0).collect();
            let a = argmax_random_tie(&scores, &mut rng_from_seed(seed));
            let b = argmax_random_tie(&shifted, &mut rng_from_seed(seed));
            prop_assert_eq!(a, b);
        }

        #[test]
        fn lambda_never_raises_scores(
            arm_a in proptest::collection::vec(-0.5f64..0.5, 1..4),
            arm_b in proptest::collection::vec(0.0f64..0.5, 1..4),
            budget in 0.05f64..1.0,
            l1 in 0.0f64..10.0,
            dl in 0.0f64..100.0,
            budget_kind in any::<bool>(),
            seed in any::<u64>(),
        ) {
            let state = RunState::from_history(vec![arm_a, arm_b], 0.5, budget).unwrap();
            let kind = if budget_kind { PolicyKind::RuinAverseUcbBudget } else { PolicyKind::RuinAverse };
            let low = PolicyConfig::new(kind, 10.0, l1, 16).unwrap();
            let high = PolicyConfig::new(kind, 10.0, l1 + dl, 16).unwrap();
            let horizon = state.stage() + 15;
            let s_low = score_actions(&low, &state, horizon, &mut rng_from_seed(seed)).unwrap();
            let s_high = score_actions(&high, &state, horizon, &mut rng_from_seed(seed)).unwrap();
            for arm in 0..2 {
                prop_assert!(s_high.values[arm] <= s_low.values[arm] + 1e-12);
            }
            // arm 1 has nonnegative rewards: no sampled ruin, value unchanged
            prop_assert_eq!(s_high.values[1], s_low.values[1]);
        }
    }
}
