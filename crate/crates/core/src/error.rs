use std::path::PathBuf;

/// Errors produced by the evaluation toolkit.
///
/// Variants are grouped by the kind of failure so that front ends can map
/// them onto exit codes with [`Error::category`].
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("empty input: {0}")]
    EmptyInput(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("non-finite feature value at sample {sample}, coordinate {coordinate}")]
    NonFinite { sample: usize, coordinate: usize },

    #[error("invalid task: {0}")]
    InvalidTask(String),

    #[error("insufficient tasks for {what}: got {tasks}, need at least {needed}")]
    InsufficientTasks {
        what: &'static str,
        tasks: usize,
        needed: usize,
    },

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("task-set hash mismatch: {left} vs {right}")]
    TaskSetMismatch { left: String, right: String },

    #[error("confidence level mismatch: {left} vs {right}")]
    PLimitMismatch { left: f64, right: f64 },

    #[error("interval modes differ: {0}")]
    ModeMismatch(String),

    #[error("value out of range: {0}")]
    OutOfRange(String),

    #[error("logistic regression diverged (non-finite loss at iteration {iteration}); use a smaller step size")]
    Divergence { iteration: usize },

    #[error("rank-deficient design: {0}")]
    RankDeficient(String),

    #[error("invalid fit: {0}")]
    InvalidFit(String),

    #[error("no comparable pairs among {0} manifests")]
    NoComparablePairs(usize),

    #[error("{path}:{line}: {message}")]
    Parse { path: String, line: usize, message: String },

    #[error("malformed manifest: field `{field}`: {message}")]
    Manifest { field: String, message: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// Coarse classification of an [`Error`], used for process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorCategory {
    Config,
    Data,
    InsufficientTasks,
}

impl Error {
    pub fn category(&self) -> ErrorCategory {
        match self {
            Error::Config(_)
            | Error::PLimitMismatch { .. }
            | Error::ModeMismatch(_)
            | Error::OutOfRange(_)
            | Error::Divergence { .. } => ErrorCategory::Config,
            Error::InsufficientTasks { .. } => ErrorCategory::InsufficientTasks,
            _ => ErrorCategory::Data,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
