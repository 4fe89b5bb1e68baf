//! Run manifests: the seed, task list and per-task accuracies of one
//! evaluation run, serialized so that anyone can replay and compare it.
//!
//! The on-disk form is JSON with a fixed field order. Accuracies are written
//! with 17 significant digits so that parsing them back is bit-exact.

use std::fmt::Write as _;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde_json::Value;

use crate::error::{Error, Result};
use crate::pool::LabeledPool;
use crate::samplers::{self, SamplingMode};
use crate::task::{task_set_hash, Task, TaskSpec};

#[derive(Debug, Clone, PartialEq)]
pub struct RunManifest {
    pub master_seed: u64,
    pub spec: TaskSpec,
    pub sampling_mode: SamplingMode,
    pub method_id: String,
    /// Content hash of the pool the tasks index into.
    pub pool_id: String,
    /// Hash of `tasks`; recomputed and checked on parse.
    pub task_set_hash: String,
    pub tasks: Vec<Task>,
    pub accuracies: Vec<f64>,
}

const FIELDS: [&str; 8] = [
    "master_seed",
    "spec",
    "sampling_mode",
    "method_id",
    "pool_id",
    "task_set_hash",
    "tasks",
    "accuracies",
];

impl RunManifest {
    /// Assembles a manifest, computing the task-set hash.
    pub fn new(
        master_seed: u64,
        spec: TaskSpec,
        sampling_mode: SamplingMode,
        method_id: impl Into<String>,
        pool_id: impl Into<String>,
        tasks: Vec<Task>,
        accuracies: Vec<f64>,
    ) -> Result<Self> {
        let manifest = RunManifest {
            master_seed,
            spec,
            sampling_mode,
            method_id: method_id.into(),
            pool_id: pool_id.into(),
            task_set_hash: task_set_hash(&tasks),
            tasks,
            accuracies,
        };
        manifest.validate()?;
        Ok(manifest)
    }

    pub fn validate(&self) -> Result<()> {
        let field = |field: &str, message: String| Error::Manifest {
            field: field.into(),
            message,
        };
        self.spec.validate().map_err(|e| field("spec", e.to_string()))?;
        if self.accuracies.len() != self.tasks.len() {
            return Err(field(
                "accuracies",
                format!("{} accuracies for {} tasks", self.accuracies.len(), self.tasks.len()),
            ));
        }
        if let Some(i) = self.accuracies.iter().position(|a| !(0.0..=1.0).contains(a)) {
            return Err(field(
                "accuracies",
                format!("entry {i} = {} is outside [0, 1]", self.accuracies[i]),
            ));
        }
        if self.sampling_mode == SamplingMode::WithReplacement && self.spec.task_count != Some(self.tasks.len()) {
            return Err(field(
                "spec",
                format!(
                    "with-replacement run declares task_count {:?} but holds {} tasks",
                    self.spec.task_count,
                    self.tasks.len()
                ),
            ));
        }
        if let Some(i) = self.tasks.iter().position(|t| t.ways() != self.spec.ways) {
            return Err(field(
                "tasks",
                format!("task {i} does not have {} ways", self.spec.ways),
            ));
        }
        let hash = task_set_hash(&self.tasks);
        if hash != self.task_set_hash {
            return Err(field(
                "task_set_hash",
                format!("recorded {} but tasks hash to {hash}", self.task_set_hash),
            ));
        }
        Ok(())
    }

    /// Checks every task against the pool it claims to come from.
    pub fn validate_against(&self, pool: &LabeledPool) -> Result<()> {
        if pool.pool_id() != self.pool_id {
            return Err(Error::Manifest {
                field: "pool_id".into(),
                message: "manifest was produced on a different pool".into(),
            });
        }
        for t in &self.tasks {
            t.validate(pool, Some(&self.spec))?;
        }
        Ok(())
    }

    /// Regenerates the task list from `(master_seed, spec, sampling_mode)`.
    pub fn replay_tasks(&self, pool: &LabeledPool) -> Result<Vec<Task>> {
        match self.sampling_mode {
            SamplingMode::WithReplacement => samplers::sample_with_replacement(pool, &self.spec, self.master_seed),
            SamplingMode::Depletion => samplers::sample_until_depleted(
                pool,
                self.spec.ways,
                self.spec.shots,
                self.spec.queries,
                self.master_seed,
            ),
        }
    }

    /// True when replaying the sampler reproduces the recorded tasks.
    pub fn replays_identically(&self, pool: &LabeledPool) -> Result<bool> {
        Ok(self.replay_tasks(pool)? == self.tasks)
    }

    pub fn to_json(&self) -> String {
        let mut out = String::new();
        out.push_str("{\n");
        let _ = writeln!(out, "  \"master_seed\": {},", self.master_seed);
        let _ = writeln!(out, "  \"spec\": {},", compact(&self.spec));
        let _ = writeln!(out, "  \"sampling_mode\": {},", compact(&self.sampling_mode));
        let _ = writeln!(out, "  \"method_id\": {},", compact(&self.method_id));
        let _ = writeln!(out, "  \"pool_id\": {},", compact(&self.pool_id));
        let _ = writeln!(out, "  \"task_set_hash\": {},", compact(&self.task_set_hash));
        out.push_str("  \"tasks\": [");
        for (i, t) in self.tasks.iter().enumerate() {
            out.push_str(if i == 0 { "\n    " } else { ",\n    " });
            out.push_str(&compact(t));
        }
        out.push_str(if self.tasks.is_empty() { "],\n" } else { "\n  ],\n" });
        out.push_str("  \"accuracies\": [");
        for (i, a) in self.accuracies.iter().enumerate() {
            out.push_str(if i == 0 { "\n    " } else { ",\n    " });
            out.push_str(&format_accuracy(*a));
        }
        out.push_str(if self.accuracies.is_empty() { "]\n" } else { "\n  ]\n" });
        out.push_str("}\n");
        out
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let mut root: Value = serde_json::from_str(text)?;
        let obj = root.as_object_mut().ok_or_else(|| Error::Manifest {
            field: "<root>".into(),
            message: "expected a JSON object".into(),
        })?;
        if let Some(unknown) = obj.keys().find(|k| !FIELDS.contains(&k.as_str())) {
            return Err(Error::Manifest {
                field: unknown.clone(),
                message: "unknown field".into(),
            });
        }
        let mut take = |name: &str| {
            obj.remove(name).ok_or_else(|| Error::Manifest {
                field: name.into(),
                message: "missing".into(),
            })
        };
        let manifest = RunManifest {
            master_seed: field(take("master_seed")?, "master_seed")?,
            spec: field(take("spec")?, "spec")?,
            sampling_mode: field(take("sampling_mode")?, "sampling_mode")?,
            method_id: field(take("method_id")?, "method_id")?,
            pool_id: field(take("pool_id")?, "pool_id")?,
            task_set_hash: field(take("task_set_hash")?, "task_set_hash")?,
            tasks: field(take("tasks")?, "tasks")?,
            accuracies: field(take("accuracies")?, "accuracies")?,
        };
        manifest.validate()?;
        Ok(manifest)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()).map_err(|e| Error::io(path, e))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }
}

fn field<T: DeserializeOwned>(value: Value, name: &str) -> Result<T> {
    serde_json::from_value(value).map_err(|e| Error::Manifest {
        field: name.into(),
        message: e.to_string(),
    })
}

fn compact<T: serde::Serialize + ?Sized>(value: &T) -> String {
    serde_json::to_string(value).expect("manifest parts always serialize")
}

/// 17 significant digits, which round-trips any `f64` exactly.
pub(crate) fn format_accuracy(x: f64) -> String {
    format!("{x:.16e}")
}
