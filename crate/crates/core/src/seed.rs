//! Deterministic seed derivation for runs and policies.
//!
//! Every random stream of an experiment is keyed by
//! `(master_seed, run_index, policy_key, purpose)` and derived by chaining
//! the SplitMix64 finalizer, so seeds can be computed independently and in
//! any order. The policy key is [`PolicyConfig::stream_key`], a function of
//! the policy's own parameters, so reordering policies never changes their
//! streams.
//!
//! [`PolicyConfig::stream_key`]: crate::policies::PolicyConfig::stream_key

use serde::{Deserialize, Serialize};

/// SplitMix64 output function applied to `x + golden gamma`. A bijection on `u64`.
#[inline]
pub fn mix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StreamPurpose {
    /// Arm parameters of a run. Independent of the policy.
    Environment,
    /// Rewards observed when pulling arms.
    Rewards,
    /// Bootstrap resampling and tie-breaking.
    PolicyRng,
}

impl StreamPurpose {
    fn tag(self) -> u64 {
        match self {
            StreamPurpose::Environment => 0x656E_7669_726F_6E00,
            StreamPurpose::Rewards => 0x7265_7761_7264_7300,
            StreamPurpose::PolicyRng => 0x706F_6C69_6379_0000,
        }
    }
}

pub fn seed_schedule(master_seed: u64, run_index: u64, policy_key: u64, purpose: StreamPurpose) -> u64 {
    let base = mix64(mix64(master_seed) ^ purpose.tag());
    let run = mix64(base ^ run_index);
    match purpose {
        StreamPurpose::Environment => run,
        StreamPurpose::Rewards | StreamPurpose::PolicyRng => mix64(run ^ policy_key),
    }
}

/// Environment seed for a run that does not share its environment across
/// policies.
pub fn private_environment_seed(master_seed: u64, run_index: u64, policy_key: u64) -> u64 {
    mix64(seed_schedule(master_seed, run_index, policy_key, StreamPurpose::Environment) ^ mix64(policy_key))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn environment_seed_ignores_policy() {
        for p in [0u64, 1, 99, u64::MAX] {
            assert_eq!(
                seed_schedule(42, 3, p, StreamPurpose::Environment),
                seed_schedule(42, 3, 0, StreamPurpose::Environment)
            );
        }
    }

    #[test]
    fn purposes_are_separated() {
        let s = 42;
        assert_ne!(
            seed_schedule(s, 0, 0, StreamPurpose::Rewards),
            seed_schedule(s, 0, 0, StreamPurpose::PolicyRng)
        );
        assert_ne!(
            seed_schedule(s, 0, 0, StreamPurpose::Rewards),
            seed_schedule(s, 0, 0, StreamPurpose::Environment)
        );
        assert_ne!(
            private_environment_seed(s, 0, 7),
            seed_schedule(s, 0, 7, StreamPurpose::Environment)
        );
    }

    #[test]
    fn deterministic() {
        assert_eq!(
            seed_schedule(1, 2, 3, StreamPurpose::PolicyRng),
            seed_schedule(1, 2, 3, StreamPurpose::PolicyRng)
        );
    }

    #[test]
    fn no_collisions_over_a_million_inputs() {
        let mut seen = HashSet::with_capacity(1_100_000);
        let purposes = [StreamPurpose::Rewards, StreamPurpose::PolicyRng];
        let mut count = 0;
        'outer: for run in 0..10_000u64 {
            for policy in 0..50u64 {
                for purpose in purposes {
                    assert!(seen.insert(seed_schedule(2024, run, policy, purpose)));
                    count += 1;
                    if count == 1_000_000 {
                        break 'outer;
                    }
                }
            }
        }
        for run in 0..10_000u64 {
            assert!(seen.insert(seed_schedule(2024, run, 0, StreamPurpose::Environment)));
        }
    }
}
