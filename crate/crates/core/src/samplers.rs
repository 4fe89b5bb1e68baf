//! Task samplers.
//!
//! Two regimes are supported:
//!
//! * [`sample_with_replacement`] draws a fixed number of independent tasks
//!   from a fixed pool. Examples may recur across tasks.
//! * [`sample_until_depleted`] keeps drawing tasks, permanently removing the
//!   examples each task uses, until fewer than `ways` classes can still supply
//!   `shots + queries` examples. No example is ever used twice.
//!
//! With-replacement task `t` is drawn from its own sub-stream
//! `derive_seed(seed, t)`, which makes parallel generation produce exactly the
//! sequential output. Depletion sampling shares one stream because every task
//! depends on what the previous ones consumed.

use std::collections::HashMap;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pool::LabeledPool;
use crate::rng::{self, partial_shuffle};
use crate::task::{Task, TaskSpec};
use crate::ExecMode;

/// How tasks are drawn from the pool.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SamplingMode {
    WithReplacement,
    Depletion,
}

impl std::fmt::Display for SamplingMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SamplingMode::WithReplacement => "with_replacement",
            SamplingMode::Depletion => "depletion",
        })
    }
}

impl std::str::FromStr for SamplingMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.replace('-', "_").as_str() {
            "with_replacement" | "closed" => Ok(SamplingMode::WithReplacement),
            "depletion" | "without_replacement" | "open" => Ok(SamplingMode::Depletion),
            other => Err(Error::Config(format!("unknown sampling mode `{other}`"))),
        }
    }
}

/// Draws `spec.task_count` tasks independently from `pool`.
///
/// Each task picks `ways` distinct classes uniformly among classes holding at
/// least `shots + queries` examples, then `shots + queries` distinct examples
/// per class, split into support and query.
pub fn sample_with_replacement(pool: &LabeledPool, spec: &TaskSpec, seed: u64) -> Result<Vec<Task>> {
    sample_with_replacement_exec(pool, spec, seed, ExecMode::Sequential)
}

pub fn sample_with_replacement_exec(
    pool: &LabeledPool,
    spec: &TaskSpec,
    seed: u64,
    exec: ExecMode,
) -> Result<Vec<Task>> {
    spec.validate()?;
    let count = spec
        .task_count
        .ok_or_else(|| Error::Config("with-replacement sampling requires a task count".into()))?;
    let need = spec.per_class();
    let eligible: Vec<usize> = pool
        .classes()
        .iter()
        .filter(|c| c.len() >= need)
        .map(|c| c.class_id())
        .collect();
    if eligible.len() < spec.ways {
        return Err(Error::Config(format!(
            "{} classes hold at least {need} examples, {}-way tasks need {}",
            eligible.len(),
            spec.ways,
            spec.ways
        )));
    }

    let draw = |t: usize| -> Task {
        let mut rng = rng::substream(seed, t as u64);
        let mut classes = eligible.clone();
        partial_shuffle(&mut classes, spec.ways, &mut rng);
        classes.truncate(spec.ways);
        classes.sort_unstable();
        let mut support = Vec::with_capacity(spec.ways);
        let mut query = Vec::with_capacity(spec.ways);
        for &c in &classes {
            let mut picked = sample_distinct(pool.class(c).len(), need, &mut rng);
            let q = picked.split_off(spec.shots);
            support.push(picked);
            query.push(q);
        }
        Task {
            class_subset: classes,
            support,
            query,
        }
    };

    Ok(match exec {
        ExecMode::Sequential => (0..count).map(draw).collect(),
        ExecMode::Parallel => (0..count).into_par_iter().map(draw).collect(),
    })
}

/// `take(m, shuffle(0..n))`, computed as a partial Fisher-Yates on a virtual
/// identity array so that only `m` positions are materialized.
fn sample_distinct<R: Rng + ?Sized>(n: usize, m: usize, rng: &mut R) -> Vec<usize> {
    debug_assert!(m <= n);
    let mut moved: HashMap<usize, usize> = HashMap::with_capacity(2 * m);
    let mut out = Vec::with_capacity(m);
    for i in 0..m {
        let j = rng.random_range(i..n);
        let at_j = moved.get(&j).copied().unwrap_or(j);
        let at_i = moved.get(&i).copied().unwrap_or(i);
        moved.insert(j, at_i);
        out.push(at_j);
    }
    out
}

/// Moves `m` uniformly chosen elements of `items` to its tail (in draw order
/// from the back) using `m` Fisher-Yates swaps.
fn draw_to_tail<R: Rng + ?Sized>(items: &mut [usize], m: usize, rng: &mut R) {
    let len = items.len();
    for i in 0..m {
        let last = len - 1 - i;
        let j = rng.random_range(0..=last);
        items.swap(j, last);
    }
}

/// Draws tasks without replacement until the pool is depleted.
///
/// The loop runs while at least `ways` classes still hold `shots + queries`
/// examples; eligibility is re-evaluated at every iteration. For each chosen
/// class the support set is drawn first and the query set is drawn from what
/// remains, then both are removed from the pool for good.
///
/// An empty result means the pool could not supply a single task.
pub fn sample_until_depleted(
    pool: &LabeledPool,
    ways: usize,
    shots: usize,
    queries: usize,
    seed: u64,
) -> Result<Vec<Task>> {
    TaskSpec::new(ways, shots, queries).validate()?;
    let need = shots + queries;
    let mut remaining: Vec<Vec<usize>> = pool.classes().iter().map(|c| (0..c.len()).collect()).collect();
    let mut rng = rng::stream(seed);
    let mut tasks = Vec::new();

    loop {
        let mut eligible: Vec<usize> = remaining
            .iter()
            .enumerate()
            .filter(|(_, r)| r.len() >= need)
            .map(|(c, _)| c)
            .collect();
        if eligible.len() < ways {
            break;
        }
        partial_shuffle(&mut eligible, ways, &mut rng);
        eligible.truncate(ways);
        eligible.sort_unstable();

        let mut support = Vec::with_capacity(ways);
        let mut query = Vec::with_capacity(ways);
        for &c in &eligible {
            let rem = &mut remaining[c];
            let len = rem.len();
            draw_to_tail(rem, shots, &mut rng);
            draw_to_tail(&mut rem[..len - shots], queries, &mut rng);
            support.push(rem[len - shots..].to_vec());
            query.push(rem[len - need..len - shots].to_vec());
            rem.truncate(len - need);
        }
        tasks.push(Task {
            class_subset: eligible,
            support,
            query,
        });
    }
    Ok(tasks)
}

/// Closed-form estimate of how many tasks depletion sampling yields on a
/// balanced pool of `classes` classes with `per_class` examples each:
/// `floor(C·N / (K·(S+Q)))`.
pub fn estimate_task_count(classes: usize, per_class: usize, ways: usize, shots: usize, queries: usize) -> usize {
    estimate_task_count_from_total(classes * per_class, ways, shots, queries)
}

/// Same estimate from the total sample count `|D|`.
pub fn estimate_task_count_from_total(total: usize, ways: usize, shots: usize, queries: usize) -> usize {
    let per_task = ways * (shots + queries);
    if per_task == 0 {
        return 0;
    }
    total / per_task
}
