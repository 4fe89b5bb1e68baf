//! End-to-end evaluation runs: sample tasks, score a method on each, and
//! summarize the accuracies with the interval that matches the sampling
//! regime.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::adapters::{evaluate_tasks, Adapter};
use crate::error::{Error, Result};
use crate::ingest::ingest_feature_file;
use crate::manifest::RunManifest;
use crate::pool::LabeledPool;
use crate::samplers::{sample_until_depleted, sample_with_replacement_exec, SamplingMode};
use crate::stats::{normal_ci, student_ci, AccuracySeries, IntervalEstimate, DEFAULT_P_LIMIT};
use crate::task::TaskSpec;
use crate::variance_lab::{gen_gaussian_pool, SynthConfig};
use crate::ExecMode;

/// Where the evaluation pool comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PoolSource {
    FeatureFile(PathBuf),
    Synthetic(SynthConfig),
}

impl PoolSource {
    pub fn load(&self) -> Result<LabeledPool> {
        match self {
            PoolSource::FeatureFile(path) => ingest_feature_file(path),
            PoolSource::Synthetic(cfg) => gen_gaussian_pool(cfg),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProtocolConfig {
    pub mode: SamplingMode,
    /// `task_count` is required with replacement and forbidden for depletion.
    pub spec: TaskSpec,
    pub adapter: Adapter,
    pub p_limit: f64,
    pub master_seed: u64,
    /// Name recorded in the manifest; defaults to the adapter's short name.
    pub method_id: Option<String>,
}

impl ProtocolConfig {
    pub fn new(mode: SamplingMode, spec: TaskSpec, adapter: Adapter, master_seed: u64) -> Self {
        ProtocolConfig {
            mode,
            spec,
            adapter,
            p_limit: DEFAULT_P_LIMIT,
            master_seed,
            method_id: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.spec.validate()?;
        self.adapter.validate()?;
        crate::stats::quantiles::check_p_limit(self.p_limit)?;
        match (self.mode, self.spec.task_count) {
            (SamplingMode::WithReplacement, None) => {
                Err(Error::Config("with-replacement runs need a task count".into()))
            }
            (SamplingMode::Depletion, Some(_)) => Err(Error::Config(
                "depletion runs take as many tasks as the pool allows; drop the task count".into(),
            )),
            _ => Ok(()),
        }
    }

    pub fn method_id(&self) -> String {
        self.method_id
            .clone()
            .unwrap_or_else(|| self.adapter.short_name().to_owned())
    }
}

/// A completed run.
#[derive(Debug, Clone, PartialEq)]
pub struct ProtocolOutcome {
    pub manifest: RunManifest,
    /// Normal interval with replacement, Student interval after depletion.
    pub interval: IntervalEstimate,
}

/// Samples tasks from `pool` according to `config`, evaluates the adapter on
/// every task and builds the manifest and confidence interval.
pub fn run_protocol(pool: &LabeledPool, config: &ProtocolConfig, exec: ExecMode) -> Result<ProtocolOutcome> {
    config.validate()?;
    let tasks = match config.mode {
        SamplingMode::WithReplacement => sample_with_replacement_exec(pool, &config.spec, config.master_seed, exec)?,
        SamplingMode::Depletion => sample_until_depleted(
            pool,
            config.spec.ways,
            config.spec.shots,
            config.spec.queries,
            config.master_seed,
        )?,
    };
    if config.mode == SamplingMode::Depletion && tasks.len() < 2 {
        return Err(Error::InsufficientTasks {
            what: "open CI",
            tasks: tasks.len(),
            needed: 2,
        });
    }
    let accuracies = evaluate_tasks(&config.adapter, &tasks, pool, exec)?;
    let manifest = RunManifest::new(
        config.master_seed,
        config.spec,
        config.mode,
        config.method_id(),
        pool.pool_id(),
        tasks,
        accuracies,
    )?;
    let interval = interval_for(&manifest, config.p_limit)?;
    Ok(ProtocolOutcome { manifest, interval })
}

/// The interval matching the manifest's sampling regime.
pub fn interval_for(manifest: &RunManifest, p_limit: f64) -> Result<IntervalEstimate> {
    let series = AccuracySeries::new(manifest.accuracies.clone())?.with_task_set_hash(manifest.task_set_hash.clone());
    match manifest.sampling_mode {
        SamplingMode::WithReplacement => normal_ci(&series, p_limit),
        SamplingMode::Depletion => student_ci(&series, p_limit),
    }
}
