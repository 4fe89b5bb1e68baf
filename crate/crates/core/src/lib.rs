//! Few-shot evaluation with honest error bars.
//!
//! The crate covers the whole evaluation loop for few-shot classifiers that
//! run on precomputed features:
//!
//! * [`samplers`] draw tasks either with replacement from a fixed pool or
//!   without replacement until the pool is depleted;
//! * [`adapters`] fit a classifier on each task's support set and score its
//!   queries;
//! * [`stats`] turns per-task accuracies into closed, open or paired
//!   confidence intervals and `+`/`0`/`−` verdicts;
//! * [`variance_lab`] measures and models how the variance of the average
//!   accuracy depends on the number of queries per class;
//! * [`protocol`], [`manifest`], [`compare`] and [`output`] tie these into
//!   reproducible runs and significance matrices.
//!
//! ```
//! use fewshot_eval::{run_protocol, Adapter, ExecMode, ProtocolConfig, SamplingMode, TaskSpec};
//! use fewshot_eval::variance_lab::{gen_gaussian_pool, SynthConfig};
//!
//! let pool = gen_gaussian_pool(&SynthConfig::two_gaussians(1000, 7)).unwrap();
//! let cfg = ProtocolConfig::new(SamplingMode::Depletion, TaskSpec::new(2, 5, 15), Adapter::ncc(), 42);
//! let run = run_protocol(&pool, &cfg, ExecMode::Sequential).unwrap();
//! assert_eq!(run.manifest.tasks.len(), 25);
//! println!("{}", run.interval);
//! ```

pub mod adapters;
pub mod compare;
pub mod error;
pub mod ingest;
pub mod manifest;
pub mod output;
pub mod pool;
pub mod protocol;
pub mod rng;
pub mod samplers;
pub mod stats;
pub mod task;
pub mod variance_lab;

pub use adapters::{evaluate_task, evaluate_tasks, Adapter, FittedModel, LogRegConfig, OracleConfig};
pub use compare::{compare_runs, conclusiveness_report, ConclusivenessReport, SignificanceMatrix, VerdictCell};
pub use error::{Error, ErrorCategory, Result};
pub use ingest::{ingest_feature_file, read_features};
pub use manifest::RunManifest;
pub use pool::{FeatureVector, LabeledPool};
pub use protocol::{run_protocol, PoolSource, ProtocolConfig, ProtocolOutcome};
pub use samplers::{
    estimate_task_count, sample_until_depleted, sample_with_replacement, sample_with_replacement_exec, SamplingMode,
};
pub use stats::{
    compare_intervals, conclusive_probability_bound, normal_ci, paired_ci, paired_series, paired_verdict, student_ci,
    AccuracySeries, ComparisonVerdict, IntervalEstimate, IntervalMode, PairedSeries, Symbol, VerdictMode,
    DEFAULT_P_LIMIT,
};
pub use task::{task_set_hash, Task, TaskSpec};

/// Whether independent work units may run on the rayon thread pool.
///
/// Results never depend on the choice: every unit draws from its own seeded
/// stream and outputs are collected by index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ExecMode {
    #[default]
    Sequential,
    Parallel,
}
