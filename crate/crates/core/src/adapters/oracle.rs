use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::rng;
use crate::task::Task;

/// Synthetic "method" whose per-task accuracy is
/// `base + difficulty_sd·d(task) + noise_sd·e(task, stream)`, clamped to
/// `[0, 1]` and rounded to the `1/(K·Q)` grid.
///
/// `d` depends on the task only, so two oracles evaluated on the same tasks
/// share it; `e` is independent per `stream`. The correlation between two
/// oracles with equal settings is `difficulty_sd² / (difficulty_sd² + noise_sd²)`
/// before clamping and rounding.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleConfig {
    pub base: f64,
    pub difficulty_sd: f64,
    pub noise_sd: f64,
    pub stream: u64,
}

impl OracleConfig {
    /// Settings for which two oracles correlate at `r` with total
    /// per-task standard deviation `total_sd`.
    pub fn with_correlation(base: f64, total_sd: f64, r: f64, stream: u64) -> Self {
        OracleConfig {
            base,
            difficulty_sd: total_sd * r.sqrt(),
            noise_sd: total_sd * (1.0 - r).sqrt(),
            stream,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.base) {
            return Err(Error::Config("oracle base accuracy must lie in [0, 1]".into()));
        }
        if !(self.difficulty_sd >= 0.0 && self.noise_sd >= 0.0) {
            return Err(Error::Config("oracle spreads must be >= 0".into()));
        }
        Ok(())
    }

    pub fn accuracy(&self, task: &Task) -> f64 {
        let key = task_key(task);
        let d: f64 = StandardNormal.sample(&mut rng::substream(key, 0));
        let e: f64 = StandardNormal.sample(&mut rng::substream(key, rng::derive_seed(self.stream, 1)));
        let raw = (self.base + self.difficulty_sd * d + self.noise_sd * e).clamp(0.0, 1.0);
        let grid = task.query_count().max(1) as f64;
        (raw * grid).round() / grid
    }
}

fn task_key(task: &Task) -> u64 {
    let encoded = serde_json::to_vec(task).expect("tasks always serialize");
    let digest = Sha256::digest(&encoded);
    let mut bytes = [0u8; 8];
    bytes.copy_from_slice(&digest[..8]);
    u64::from_le_bytes(bytes)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn task(offset: usize) -> Task {
        Task {
            class_subset: vec![0, 1],
            support: vec![vec![offset], vec![offset + 1]],
            query: vec![vec![offset + 2, offset + 3], vec![offset + 4, offset + 5]],
        }
    }

    #[test]
    fn values_lie_on_the_grid() {
        let o = OracleConfig::with_correlation(0.6, 0.2, 0.5, 1);
        for i in 0..50 {
            let a = o.accuracy(&task(i * 10));
            assert!((0.0..=1.0).contains(&a));
            assert_eq!((a * 4.0).fract(), 0.0);
        }
    }

    #[test]
    fn zero_spread_returns_rounded_base() {
        let o = OracleConfig {
            base: 0.6,
            difficulty_sd: 0.0,
            noise_sd: 0.0,
            stream: 0,
        };
        assert_eq!(o.accuracy(&task(0)), 0.5);
    }

    #[test]
    fn shared_difficulty_with_no_noise_gives_identical_series() {
        let a = OracleConfig {
            base: 0.5,
            difficulty_sd: 0.1,
            noise_sd: 0.0,
            stream: 1,
        };
        let b = OracleConfig { stream: 2, ..a };
        for i in 0..20 {
            assert_eq!(a.accuracy(&task(i)), b.accuracy(&task(i)));
        }
    }

    #[test]
    fn rejects_bad_settings() {
        assert!(OracleConfig {
            base: 1.2,
            difficulty_sd: 0.0,
            noise_sd: 0.0,
            stream: 0
        }
        .validate()
        .is_err());
        assert!(OracleConfig {
            base: 0.5,
            difficulty_sd: -1.0,
            noise_sd: 0.0,
            stream: 0
        }
        .validate()
        .is_err());
    }
}
