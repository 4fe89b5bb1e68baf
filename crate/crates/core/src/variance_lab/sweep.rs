use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::synth::{gen_gaussian_pool, SynthConfig};
use crate::adapters::{evaluate_tasks, Adapter};
use crate::error::{Error, Result};
use crate::rng::derive_seed;
use crate::samplers::{estimate_task_count_from_total, sample_until_depleted};
use crate::stats::{self, mean_and_variance};
use crate::ExecMode;

/// Query counts tried by default, before dropping infeasible ones.
pub const DEFAULT_Q_GRID: [usize; 12] = [1, 2, 3, 5, 7, 10, 15, 20, 30, 50, 70, 90];

/// Empirical variance of the average accuracy at one query count.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub queries: usize,
    pub var_abar: f64,
    /// Average number of tasks per repetition.
    pub mean_tasks: f64,
    /// Repetitions that produced at least one task.
    pub repetitions: usize,
}

/// Keeps the grid values for which a balanced pool of `config` yields at
/// least one `ways`-way task.
pub fn feasible_q_grid(grid: &[usize], config: &SynthConfig, ways: usize, shots: usize) -> Vec<usize> {
    grid.iter()
        .copied()
        .filter(|&q| q >= 1 && is_feasible(config, ways, shots, q))
        .collect()
}

fn is_feasible(config: &SynthConfig, ways: usize, shots: usize, queries: usize) -> bool {
    ways <= config.classes()
        && shots + queries <= config.per_class()
        && estimate_task_count_from_total(config.total_samples, ways, shots, queries) >= 1
}

/// Seed of the pool used by repetition `rep`.
pub fn repetition_seed(config: &SynthConfig, rep: usize) -> u64 {
    derive_seed(config.seed, rep as u64)
}

/// Seed of the depletion sampler for query count `queries` on a given pool.
///
/// Lives in a separate domain from the per-class streams of the pool itself.
pub fn sampling_seed(pool_seed: u64, queries: usize) -> u64 {
    derive_seed(derive_seed(pool_seed, SAMPLING_DOMAIN), queries as u64)
}

const SAMPLING_DOMAIN: u64 = 1 << 63;

/// Measures `Var(Ā)` against the number of queries.
///
/// Every repetition draws a fresh pool from `config` (seed
/// [`repetition_seed`]), samples tasks until depletion for each `Q` on that
/// pool, and records the average accuracy `Ā`. The variance of `Ā` across
/// repetitions is reported per `Q`. Repetitions are independent and may run
/// in parallel; results do not depend on the execution mode.
pub fn sweep_variance(
    config: &SynthConfig,
    ways: usize,
    shots: usize,
    q_grid: &[usize],
    repetitions: usize,
    adapter: &Adapter,
    exec: ExecMode,
) -> Result<Vec<SweepPoint>> {
    config.validate()?;
    adapter.validate()?;
    if repetitions < 2 {
        return Err(Error::Config("a variance sweep needs at least two repetitions".into()));
    }
    if q_grid.is_empty() {
        return Err(Error::Config("empty query grid".into()));
    }
    if let Some(&q) = q_grid.iter().find(|&&q| q == 0 || !is_feasible(config, ways, shots, q)) {
        return Err(Error::Config(format!(
            "Q = {q} is infeasible: no {ways}-way {shots}-shot task fits a pool of {} samples over {} classes",
            config.total_samples,
            config.classes()
        )));
    }

    let run_rep = |rep: usize| -> Result<Vec<(Option<f64>, usize)>> {
        let pool_seed = repetition_seed(config, rep);
        let pool = gen_gaussian_pool(&config.with_seed(pool_seed))?;
        q_grid
            .iter()
            .map(|&q| {
                let tasks = sample_until_depleted(&pool, ways, shots, q, sampling_seed(pool_seed, q))?;
                if tasks.is_empty() {
                    return Ok((None, 0));
                }
                let acc = evaluate_tasks(adapter, &tasks, &pool, ExecMode::Sequential)?;
                Ok((Some(stats::mean(&acc)), tasks.len()))
            })
            .collect()
    };

    let per_rep: Vec<Vec<(Option<f64>, usize)>> = match exec {
        ExecMode::Sequential => (0..repetitions).map(run_rep).collect::<Result<_>>()?,
        ExecMode::Parallel => (0..repetitions).into_par_iter().map(run_rep).collect::<Result<_>>()?,
    };

    q_grid
        .iter()
        .enumerate()
        .map(|(qi, &q)| {
            let abars: Vec<f64> = per_rep.iter().filter_map(|r| r[qi].0).collect();
            let tasks: usize = per_rep.iter().map(|r| r[qi].1).sum();
            if abars.len() < 2 {
                return Err(Error::InsufficientTasks {
                    what: "a variance estimate at this Q",
                    tasks: abars.len(),
                    needed: 2,
                });
            }
            let (_, var_abar) = mean_and_variance(&abars)?;
            Ok(SweepPoint {
                queries: q,
                var_abar,
                mean_tasks: tasks as f64 / repetitions as f64,
                repetitions: abars.len(),
            })
        })
        .collect()
}

/// Index of the smallest `var_abar` (first one on ties).
pub fn empirical_argmin(points: &[SweepPoint]) -> Option<&SweepPoint> {
    points.iter().fold(None, |best: Option<&SweepPoint>, p| match best {
        Some(b) if b.var_abar <= p.var_abar => Some(b),
        _ => Some(p),
    })
}

/// Per-task accuracies from repeated depletion runs on fresh pools, until at
/// least `min_tasks` tasks have been evaluated.
pub fn depletion_accuracies(
    config: &SynthConfig,
    ways: usize,
    shots: usize,
    queries: usize,
    adapter: &Adapter,
    min_tasks: usize,
) -> Result<Vec<f64>> {
    config.validate()?;
    if !is_feasible(config, ways, shots, queries) {
        return Err(Error::Config(format!("Q = {queries} is infeasible for this pool")));
    }
    let mut out = Vec::with_capacity(min_tasks);
    let mut rep = 0;
    while out.len() < min_tasks {
        let pool_seed = repetition_seed(config, rep);
        let pool = gen_gaussian_pool(&config.with_seed(pool_seed))?;
        let tasks = sample_until_depleted(&pool, ways, shots, queries, sampling_seed(pool_seed, queries))?;
        out.extend(evaluate_tasks(adapter, &tasks, &pool, ExecMode::Sequential)?);
        rep += 1;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::variance_lab::synth::GaussianClassSpec;

    #[test]
    fn grid_truncation() {
        let cfg = SynthConfig::two_gaussians(100, 0);
        assert_eq!(
            feasible_q_grid(&DEFAULT_Q_GRID, &cfg, 2, 5),
            vec![1, 2, 3, 5, 7, 10, 15, 20, 30]
        );
    }

    #[test]
    fn separated_classes_have_zero_variance() {
        let cfg = SynthConfig {
            class_specs: vec![GaussianClassSpec::new(-1.0, 1e-9), GaussianClassSpec::new(1.0, 1e-9)],
            total_samples: 200,
            seed: 3,
        };
        let pts = sweep_variance(&cfg, 2, 5, &[1, 5, 20], 5, &Adapter::ncc(), ExecMode::Sequential).unwrap();
        assert!(pts.iter().all(|p| p.var_abar == 0.0));
        assert_eq!(pts[0].mean_tasks, 16.0);
    }

    #[test]
    fn parallel_equals_sequential() {
        let cfg = SynthConfig::two_gaussians(200, 8);
        let a = sweep_variance(&cfg, 2, 3, &[1, 4, 9], 16, &Adapter::ncc(), ExecMode::Sequential).unwrap();
        let b = sweep_variance(&cfg, 2, 3, &[1, 4, 9], 16, &Adapter::ncc(), ExecMode::Parallel).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn rejects_bad_requests() {
        let cfg = SynthConfig::two_gaussians(100, 0);
        assert!(sweep_variance(&cfg, 2, 5, &[90], 5, &Adapter::ncc(), ExecMode::Sequential).is_err());
        assert!(sweep_variance(&cfg, 2, 5, &[5], 1, &Adapter::ncc(), ExecMode::Sequential).is_err());
        assert!(sweep_variance(&cfg, 2, 5, &[], 5, &Adapter::ncc(), ExecMode::Sequential).is_err());
    }

    #[test]
    fn argmin_picks_first_smallest() {
        let p = |q, v| SweepPoint {
            queries: q,
            var_abar: v,
            mean_tasks: 1.0,
            repetitions: 2,
        };
        let pts = [p(1, 3.0), p(2, 1.0), p(3, 1.0), p(4, 2.0)];
        assert_eq!(empirical_argmin(&pts).unwrap().queries, 2);
        assert!(empirical_argmin(&[]).is_none());
    }
}
