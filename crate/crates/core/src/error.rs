use std::path::PathBuf;

use thiserror::Error;

use crate::solvers::IterationTrace;

/// Everything that can go wrong between loading a system and reporting on it.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix is not positive definite (pivot {pivot:e} at index {index})")]
    NotPositiveDefinite { index: usize, pivot: f64 },

    #[error("matrix is not symmetric (relative asymmetry {0:e})")]
    NotSymmetric(f64),

    #[error("non-finite entry in {0}")]
    NonFinite(&'static str),

    #[error("unsupported Matrix Market format: {0}")]
    UnsupportedFormat(String),

    #[error("malformed Matrix Market entry on line {line}: {reason}")]
    MalformedEntry { line: usize, reason: String },

    #[error("entry ({row}, {col}) on line {line} is outside a {rows}x{cols} matrix")]
    IndexOutOfBounds {
        line: usize,
        row: usize,
        col: usize,
        rows: usize,
        cols: usize,
    },

    #[error("invalid dimensions: {0}")]
    InvalidDimensions(String),

    #[error("planted solution does not satisfy the system (relative residual {0:e})")]
    InconsistentSolution(f64),

    #[error("{rows} rows cannot be split evenly across {m} workers")]
    IndivisibleRows { rows: usize, m: usize },

    #[error("block {block} does not have full row rank")]
    RankDeficientBlock { block: usize },

    #[error("degenerate spectrum: {0}")]
    DegenerateSpectrum(String),

    #[error("iteration did not converge: {0}")]
    NotConverged(String),

    #[error("parameter tuning failed: {0}")]
    TuningFailed(String),

    #[error("{method} diverged at iteration {iteration}")]
    Diverged {
        method: String,
        iteration: usize,
        trace: Box<IterationTrace>,
    },

    #[error("block iteration matrix of order {order} exceeds the verification limit {limit}")]
    TooLarge { order: usize, limit: usize },

    #[error("spectrum verification rejected {} eigenvalue(s): {rejected:?}", rejected.len())]
    VerificationFailed { rejected: Vec<(f64, f64)> },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Process exit classes used by the command-line front end.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitClass {
    Usage = 1,
    Data = 2,
    Numerical = 3,
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn exit_class(&self) -> ExitClass {
        match self {
            Error::InvalidParameter(_) => ExitClass::Usage,
            Error::UnsupportedFormat(_)
            | Error::MalformedEntry { .. }
            | Error::IndexOutOfBounds { .. }
            | Error::InvalidDimensions(_)
            | Error::IndivisibleRows { .. }
            | Error::InconsistentSolution(_)
            | Error::RankDeficientBlock { .. }
            | Error::DimensionMismatch(_)
            | Error::NonFinite(_)
            | Error::Io { .. }
            | Error::Json(_) => ExitClass::Data,
            Error::NotPositiveDefinite { .. }
            | Error::NotSymmetric(_)
            | Error::DegenerateSpectrum(_)
            | Error::TuningFailed(_)
            | Error::NotConverged(_)
            | Error::Diverged { .. }
            | Error::TooLarge { .. }
            | Error::VerificationFailed { .. }
            | Error::InsufficientData(_) => ExitClass::Numerical,
        }
    }
}
