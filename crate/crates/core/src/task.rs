//! Task specifications and sampled tasks.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::pool::LabeledPool;

/// Shape of a few-shot task: `ways` classes, `shots` support and `queries`
/// query examples per class, and (with-replacement sampling only) the number
/// of tasks to draw.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaskSpec {
    pub ways: usize,
    pub shots: usize,
    pub queries: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub task_count: Option<usize>,
}

impl TaskSpec {
    pub fn new(ways: usize, shots: usize, queries: usize) -> Self {
        TaskSpec {
            ways,
            shots,
            queries,
            task_count: None,
        }
    }

    pub fn with_task_count(mut self, tasks: usize) -> Self {
        self.task_count = Some(tasks);
        self
    }

    /// Examples consumed per class by one task.
    pub fn per_class(&self) -> usize {
        self.shots + self.queries
    }

    pub fn validate(&self) -> Result<()> {
        if self.ways < 2 {
            return Err(Error::Config(format!("ways must be >= 2, got {}", self.ways)));
        }
        if self.shots < 1 {
            return Err(Error::Config("shots must be >= 1".into()));
        }
        if self.queries < 1 {
            return Err(Error::Config("queries must be >= 1".into()));
        }
        if self.task_count == Some(0) {
            return Err(Error::Config("task count must be >= 1".into()));
        }
        Ok(())
    }
}

/// One episode: a class subset with per-class support and query indices.
///
/// `class_subset` is sorted ascending; `support[i]` and `query[i]` index into
/// the samples of class `class_subset[i]`. Local label `i` therefore refers to
/// the `i`-th smallest class id of the task.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Task {
    pub class_subset: Vec<usize>,
    pub support: Vec<Vec<usize>>,
    pub query: Vec<Vec<usize>>,
}

impl Task {
    pub fn ways(&self) -> usize {
        self.class_subset.len()
    }

    /// Total number of query examples (K·Q for balanced tasks).
    pub fn query_count(&self) -> usize {
        self.query.iter().map(Vec::len).sum()
    }

    /// Checks the task invariants against `pool` and, when given, `spec`.
    pub fn validate(&self, pool: &LabeledPool, spec: Option<&TaskSpec>) -> Result<()> {
        let k = self.class_subset.len();
        if self.support.len() != k || self.query.len() != k {
            return Err(Error::InvalidTask(
                "support/query lists do not match the class subset".into(),
            ));
        }
        if k < 2 {
            return Err(Error::InvalidTask(format!("task has {k} classes")));
        }
        if self.class_subset.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidTask("class subset must be strictly increasing".into()));
        }
        if let Some(spec) = spec {
            if k != spec.ways {
                return Err(Error::InvalidTask(format!(
                    "task has {k} classes, spec requires {}",
                    spec.ways
                )));
            }
        }
        for ((&c, support), query) in self.class_subset.iter().zip(&self.support).zip(&self.query) {
            if c >= pool.num_classes() {
                return Err(Error::InvalidTask(format!("unknown class id {c}")));
            }
            if support.is_empty() || query.is_empty() {
                return Err(Error::InvalidTask(format!(
                    "class {c} has an empty support or query set"
                )));
            }
            if let Some(spec) = spec {
                if support.len() != spec.shots || query.len() != spec.queries {
                    return Err(Error::InvalidTask(format!(
                        "class {c}: {} shots / {} queries, spec requires {} / {}",
                        support.len(),
                        query.len(),
                        spec.shots,
                        spec.queries
                    )));
                }
            }
            let n = pool.class(c).len();
            let mut used: Vec<usize> = support.iter().chain(query).copied().collect();
            if let Some(&bad) = used.iter().find(|&&i| i >= n) {
                return Err(Error::InvalidTask(format!(
                    "class {c}: index {bad} out of range ({n} samples)"
                )));
            }
            used.sort_unstable();
            if used.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::InvalidTask(format!(
                    "class {c}: repeated sample index within the task"
                )));
            }
        }
        Ok(())
    }
}

/// Hex SHA-256 of the canonical (compact JSON) encoding of a task list.
///
/// Two accuracy series may be paired only when their task-set hashes agree.
pub fn task_set_hash(tasks: &[Task]) -> String {
    let encoded = serde_json::to_vec(tasks).expect("task lists always serialize");
    hex::encode(Sha256::digest(&encoded))
}
