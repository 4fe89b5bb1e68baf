//! Confidence intervals over per-task accuracies, paired differences and
//! interval-comparison verdicts.
//!
//! Three constructions are provided:
//!
//! * closed intervals ([`normal_ci`]) use the normal critical value and suit
//!   many tasks drawn with replacement from a fixed pool;
//! * open intervals ([`student_ci`]) use the Student-t critical value with
//!   `T − 1` degrees of freedom and suit the few independent tasks obtained by
//!   depletion sampling;
//! * paired intervals ([`paired_ci`]) are Student intervals on the per-task
//!   differences `Δ_t = A_t − B_t` of two methods run on identical tasks.
//!
//! Two unpaired intervals give a conclusive verdict only when they do not
//! intersect; a paired interval is conclusive when it excludes zero.

pub mod quantiles;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
pub use quantiles::{normal_critical, student_critical};

/// Default nominal coverage.
pub const DEFAULT_P_LIMIT: f64 = 0.95;

/// Per-task accuracies of one method.
#[derive(Debug, Clone, PartialEq)]
pub struct AccuracySeries {
    values: Vec<f64>,
    task_set_hash: Option<String>,
}

impl AccuracySeries {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptyInput("accuracy series has no tasks".into()));
        }
        if let Some(i) = values.iter().position(|v| !(0.0..=1.0).contains(v)) {
            return Err(Error::OutOfRange(format!(
                "accuracy {i} = {} is outside [0, 1]",
                values[i]
            )));
        }
        Ok(AccuracySeries {
            values,
            task_set_hash: None,
        })
    }

    /// Tags the series with the hash of the task list it was measured on.
    pub fn with_task_set_hash(mut self, hash: impl Into<String>) -> Self {
        self.task_set_hash = Some(hash.into());
        self
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn task_set_hash(&self) -> Option<&str> {
        self.task_set_hash.as_deref()
    }

    pub fn mean(&self) -> f64 {
        mean(&self.values)
    }

    /// Mean and Bessel-corrected sample variance; needs at least two tasks.
    pub fn mean_and_variance(&self) -> Result<(f64, f64)> {
        mean_and_variance(&self.values)
    }
}

pub(crate) fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Mean and unbiased (`1/(n−1)`) variance of a sample of at least two values.
///
/// The variance is accumulated with Welford's update.
pub fn mean_and_variance(values: &[f64]) -> Result<(f64, f64)> {
    if values.len() < 2 {
        return Err(Error::InsufficientTasks {
            what: "a sample variance",
            tasks: values.len(),
            needed: 2,
        });
    }
    let mut running = 0.0;
    let mut m2 = 0.0;
    for (i, &v) in values.iter().enumerate() {
        let delta = v - running;
        running += delta / (i + 1) as f64;
        m2 += delta * (v - running);
    }
    Ok((mean(values), (m2 / (values.len() - 1) as f64).max(0.0)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IntervalMode {
    Normal,
    Student,
}

/// `mean ± half_width` at nominal coverage `p_limit`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntervalEstimate {
    pub mean: f64,
    pub half_width: f64,
    pub p_limit: f64,
    pub mode: IntervalMode,
    pub tasks: usize,
}

impl IntervalEstimate {
    pub fn lower(&self) -> f64 {
        self.mean - self.half_width
    }

    pub fn upper(&self) -> f64 {
        self.mean + self.half_width
    }
}

impl std::fmt::Display for IntervalEstimate {
    /// Percent points, e.g. `79.59 ± 0.52`.
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{:.2} ± {:.2}", 100.0 * self.mean, 100.0 * self.half_width)
    }
}

fn interval(values: &[f64], p_limit: f64, mode: IntervalMode, what: &'static str) -> Result<IntervalEstimate> {
    quantiles::check_p_limit(p_limit)?;
    if values.len() < 2 {
        return Err(Error::InsufficientTasks {
            what,
            tasks: values.len(),
            needed: 2,
        });
    }
    let (mean, var) = mean_and_variance(values)?;
    let t = values.len();
    let critical = match mode {
        IntervalMode::Normal => normal_critical(p_limit)?,
        IntervalMode::Student => student_critical(t - 1, p_limit)?,
    };
    Ok(IntervalEstimate {
        mean,
        half_width: critical * (var / t as f64).sqrt(),
        p_limit,
        mode,
        tasks: t,
    })
}

/// Closed interval: `mean ± z(p_limit)·σ/√T`.
pub fn normal_ci(series: &AccuracySeries, p_limit: f64) -> Result<IntervalEstimate> {
    interval(series.values(), p_limit, IntervalMode::Normal, "a closed CI")
}

/// Open interval: `mean ± t(T−1, p_limit)·σ/√T`.
pub fn student_ci(series: &AccuracySeries, p_limit: f64) -> Result<IntervalEstimate> {
    interval(series.values(), p_limit, IntervalMode::Student, "open CI")
}

/// Per-task differences between two methods evaluated on the same tasks.
#[derive(Debug, Clone, PartialEq)]
pub struct PairedSeries {
    deltas: Vec<f64>,
    mean_a: f64,
    mean_b: f64,
    correlation: Option<f64>,
}

impl PairedSeries {
    pub fn deltas(&self) -> &[f64] {
        &self.deltas
    }

    pub fn len(&self) -> usize {
        self.deltas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.deltas.is_empty()
    }

    /// Pearson correlation of the parent series; `None` when either parent is
    /// constant.
    pub fn correlation(&self) -> Option<f64> {
        self.correlation
    }

    /// Mean difference, computed as `mean(a) − mean(b)` so that its sign
    /// always agrees with the comparison of the two unpaired means.
    pub fn mean(&self) -> f64 {
        self.mean_a - self.mean_b
    }
}

/// Pairs two series measured on the same task list.
///
/// When both series carry a task-set hash the hashes must agree.
pub fn paired_series(a: &AccuracySeries, b: &AccuracySeries) -> Result<PairedSeries> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    if let (Some(ha), Some(hb)) = (a.task_set_hash(), b.task_set_hash()) {
        if ha != hb {
            return Err(Error::TaskSetMismatch {
                left: ha.to_owned(),
                right: hb.to_owned(),
            });
        }
    }
    let deltas = a.values().iter().zip(b.values()).map(|(x, y)| x - y).collect();
    Ok(PairedSeries {
        deltas,
        mean_a: a.mean(),
        mean_b: b.mean(),
        correlation: pearson(a.values(), b.values()),
    })
}

fn pearson(a: &[f64], b: &[f64]) -> Option<f64> {
    let (ma, mb) = (mean(a), mean(b));
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        let (dx, dy) = (x - ma, y - mb);
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    if saa == 0.0 || sbb == 0.0 {
        return None;
    }
    Some((sab / (saa * sbb).sqrt()).clamp(-1.0, 1.0))
}

/// Student interval on the paired differences.
pub fn paired_ci(ps: &PairedSeries, p_limit: f64) -> Result<IntervalEstimate> {
    let mut ci = interval(&ps.deltas, p_limit, IntervalMode::Student, "a paired CI")?;
    ci.mean = ps.mean();
    Ok(ci)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Symbol {
    Plus,
    Zero,
    Minus,
}

impl Symbol {
    pub fn as_char(self) -> char {
        match self {
            Symbol::Plus => '+',
            Symbol::Zero => '0',
            Symbol::Minus => '-',
        }
    }

    pub fn from_char(c: char) -> Option<Self> {
        match c {
            '+' => Some(Symbol::Plus),
            '0' => Some(Symbol::Zero),
            '-' | '−' => Some(Symbol::Minus),
            _ => None,
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            Symbol::Plus => Symbol::Minus,
            Symbol::Zero => Symbol::Zero,
            Symbol::Minus => Symbol::Plus,
        }
    }

    pub fn is_conclusive(self) -> bool {
        self != Symbol::Zero
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VerdictMode {
    Closed,
    Open,
    Paired,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComparisonVerdict {
    pub symbol: Symbol,
    pub mode: VerdictMode,
    pub p_limit: f64,
}

/// Compares two unpaired intervals: `minus` when `x1` lies entirely below
/// `x2`, `plus` when entirely above, `zero` when they intersect.
pub fn compare_intervals(x1: &IntervalEstimate, x2: &IntervalEstimate) -> Result<ComparisonVerdict> {
    if x1.p_limit != x2.p_limit {
        return Err(Error::PLimitMismatch {
            left: x1.p_limit,
            right: x2.p_limit,
        });
    }
    if x1.mode != x2.mode {
        return Err(Error::ModeMismatch(format!("{:?} vs {:?}", x1.mode, x2.mode)));
    }
    let symbol = if x1.upper() < x2.lower() {
        Symbol::Minus
    } else if x2.upper() < x1.lower() {
        Symbol::Plus
    } else {
        Symbol::Zero
    };
    Ok(ComparisonVerdict {
        symbol,
        mode: match x1.mode {
            IntervalMode::Normal => VerdictMode::Closed,
            IntervalMode::Student => VerdictMode::Open,
        },
        p_limit: x1.p_limit,
    })
}

/// Verdict of a paired interval against zero.
pub fn paired_verdict(diff: &IntervalEstimate) -> ComparisonVerdict {
    let symbol = if diff.lower() > 0.0 {
        Symbol::Plus
    } else if diff.upper() < 0.0 {
        Symbol::Minus
    } else {
        Symbol::Zero
    };
    ComparisonVerdict {
        symbol,
        mode: VerdictMode::Paired,
        p_limit: diff.p_limit,
    }
}

/// Lower bound on the probability that two non-intersecting intervals order
/// the true means correctly: `(1 − (1 − p)/2)²`.
pub fn conclusive_probability_bound(p_limit: f64) -> Result<f64> {
    quantiles::check_p_limit(p_limit)?;
    let tail = (1.0 - p_limit) / 2.0;
    Ok((1.0 - tail) * (1.0 - tail))
}
