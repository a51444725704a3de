//! Distributed solvers for consistent linear systems `Ax = b` whose rows are
//! split across `m` workers: accelerated projection-based consensus (APC) and
//! the gradient, momentum, ADMM and block-Cimmino baselines it is compared
//! against, together with the spectral tuning that predicts each method's
//! optimal rate.

// `!(x > 0.0)` also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod ingest;
pub mod linalg;
pub mod report;
pub mod simnet;
pub mod solvers;
pub mod spectral;

pub use error::{Error, Result};

/// Shortest decimal that parses back to the same `f64`.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:?}")
}
