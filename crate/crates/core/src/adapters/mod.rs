//! Few-shot classifiers conditioned on a support set, and per-task accuracy.

mod logreg;
mod ncc;
mod oracle;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use logreg::{loss_and_gradient as logreg_loss_and_gradient, LogRegConfig, LogRegModel};
pub use ncc::NccModel;
pub use oracle::OracleConfig;

use crate::error::{Error, Result};
use crate::pool::LabeledPool;
use crate::task::Task;
use crate::ExecMode;

/// A few-shot method together with its hyper-parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Adapter {
    Ncc {
        #[serde(default)]
        l2_normalize: bool,
    },
    LogisticRegression(LogRegConfig),
    Oracle(OracleConfig),
}

impl Default for Adapter {
    fn default() -> Self {
        Adapter::Ncc { l2_normalize: false }
    }
}

/// A classifier fitted on one task's support set. Class indices are local to
/// the task (position in `Task::class_subset`).
#[derive(Debug, Clone, PartialEq)]
pub enum FittedModel {
    Ncc(NccModel),
    LogisticRegression(LogRegModel),
}

impl FittedModel {
    pub fn predict(&self, x: &[f64]) -> Result<usize> {
        match self {
            FittedModel::Ncc(m) => m.predict(x),
            FittedModel::LogisticRegression(m) => m.predict(x),
        }
    }
}

impl Adapter {
    pub fn ncc() -> Self {
        Adapter::default()
    }

    pub fn short_name(&self) -> &'static str {
        match self {
            Adapter::Ncc { .. } => "ncc",
            Adapter::LogisticRegression(_) => "lr",
            Adapter::Oracle(_) => "oracle",
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Adapter::Ncc { .. } => Ok(()),
            Adapter::LogisticRegression(c) => c.validate(),
            Adapter::Oracle(c) => c.validate(),
        }
    }

    /// Fits the classifier on a per-class support set.
    ///
    /// The oracle adapter has no model and returns a configuration error.
    pub fn fit(&self, support: &[Vec<&[f64]>]) -> Result<FittedModel> {
        match self {
            Adapter::Ncc { l2_normalize } => Ok(FittedModel::Ncc(NccModel::fit(support, *l2_normalize)?)),
            Adapter::LogisticRegression(cfg) => Ok(FittedModel::LogisticRegression(LogRegModel::fit(support, cfg)?)),
            Adapter::Oracle(_) => Err(Error::Config(
                "the oracle adapter scores tasks directly and cannot be fitted".into(),
            )),
        }
    }
}

/// Accuracy of `adapter` on one task: the fraction of query examples whose
/// predicted local class matches their true class.
///
/// The result is always a multiple of `1 / (K·Q)`.
pub fn evaluate_task(adapter: &Adapter, task: &Task, pool: &LabeledPool) -> Result<f64> {
    if let Adapter::Oracle(cfg) = adapter {
        return Ok(cfg.accuracy(task));
    }
    let support: Vec<Vec<&[f64]>> = task
        .class_subset
        .iter()
        .zip(&task.support)
        .map(|(&c, idx)| idx.iter().map(|&i| pool.class(c).sample(i)).collect())
        .collect();
    let model = adapter.fit(&support)?;
    let mut correct = 0usize;
    for (local, (&c, idx)) in task.class_subset.iter().zip(&task.query).enumerate() {
        for &i in idx {
            if model.predict(pool.class(c).sample(i))? == local {
                correct += 1;
            }
        }
    }
    let total = task.query_count();
    if total == 0 {
        return Err(Error::InvalidTask("task has no queries".into()));
    }
    Ok(correct as f64 / total as f64)
}

/// Evaluates every task; the output is index-aligned with `tasks` whatever
/// the execution mode.
pub fn evaluate_tasks(adapter: &Adapter, tasks: &[Task], pool: &LabeledPool, exec: ExecMode) -> Result<Vec<f64>> {
    match exec {
        ExecMode::Sequential => tasks.iter().map(|t| evaluate_task(adapter, t, pool)).collect(),
        ExecMode::Parallel => tasks.par_iter().map(|t| evaluate_task(adapter, t, pool)).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line_pool() -> LabeledPool {
        // class 0 near -1, class 1 near +1, plus one outlier of class 1 at -1.2
        LabeledPool::from_class_data(
            vec!["neg".into(), "pos".into()],
            1,
            vec![vec![-1.0, -1.1, -0.9, -1.2], vec![1.0, 1.1, 0.9, -1.2]],
        )
        .unwrap()
    }

    #[test]
    fn all_correct_and_all_wrong() {
        let pool = line_pool();
        let good = Task {
            class_subset: vec![0, 1],
            support: vec![vec![0], vec![0]],
            query: vec![vec![1, 2], vec![1, 2]],
        };
        assert_eq!(evaluate_task(&Adapter::ncc(), &good, &pool).unwrap(), 1.0);
        let bad = Task {
            class_subset: vec![0, 1],
            support: vec![vec![0], vec![0]],
            query: vec![vec![3], vec![3]],
        };
        // class-0 query at -1.2 is right, class-1 outlier at -1.2 is wrong
        assert_eq!(evaluate_task(&Adapter::ncc(), &bad, &pool).unwrap(), 0.5);
        let swapped =
            LabeledPool::from_class_data(vec!["a".into(), "b".into()], 1, vec![vec![-1.0, 1.0], vec![1.0, -1.0]])
                .unwrap();
        let wrong = Task {
            class_subset: vec![0, 1],
            support: vec![vec![0], vec![0]],
            query: vec![vec![1], vec![1]],
        };
        assert_eq!(evaluate_task(&Adapter::ncc(), &wrong, &swapped).unwrap(), 0.0);
    }

    #[test]
    fn three_of_four() {
        let pool = line_pool();
        let t = Task {
            class_subset: vec![0, 1],
            support: vec![vec![0], vec![0]],
            query: vec![vec![1, 2], vec![1, 3]],
        };
        assert_eq!(evaluate_task(&Adapter::ncc(), &t, &pool).unwrap(), 0.75);
        let lr = Adapter::LogisticRegression(LogRegConfig::default());
        assert_eq!(evaluate_task(&lr, &t, &pool).unwrap(), 0.75);
    }

    #[test]
    fn oracle_cannot_be_fitted() {
        let o = Adapter::Oracle(OracleConfig::with_correlation(0.5, 0.1, 0.5, 0));
        let x = [0.0];
        assert!(o.fit(&[vec![&x[..]], vec![&x[..]]]).is_err());
    }

    #[test]
    fn adapter_json_shape() {
        let a = Adapter::LogisticRegression(LogRegConfig::default());
        let text = serde_json::to_string(&a).unwrap();
        assert_eq!(
            text,
            r#"{"kind":"logistic_regression","l2_penalty":0.001,"step_size":0.5,"max_iters":200}"#
        );
        let back: Adapter = serde_json::from_str(&text).unwrap();
        assert_eq!(back, a);
    }
}
