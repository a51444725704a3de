use std::fmt::Write as _;

use serde::Serialize;

use crate::fmt_f64;
use crate::spectral::{Method, MethodParams};

/// What the `error` column measures.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorKind {
    /// `||x - x*|| / ||x*||`.
    Solution,
    /// `||A x - b|| / ||b||`.
    Residual,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TraceRecord {
    pub iter: usize,
    pub error: f64,
    pub residual: f64,
}

/// Per-round error history of one solver run.
#[derive(Clone, Debug, Serialize)]
pub struct IterationTrace {
    pub method: Method,
    pub params: MethodParams,
    pub error_kind: ErrorKind,
    /// State before the first round.
    pub initial: TraceRecord,
    /// One record per completed round, `iter` running from 1.
    pub records: Vec<TraceRecord>,
    pub converged: bool,
    pub fitted_rate: Option<f64>,
    #[serde(rename = "T_empirical")]
    pub t_empirical: Option<f64>,
    /// Final master estimate.
    #[serde(skip)]
    pub x: Vec<f64>,
    /// Master estimate after every round, starting with the initial one,
    /// when requested.
    #[serde(skip)]
    pub iterates: Option<Vec<Vec<f64>>>,
}

impl IterationTrace {
    /// Number of completed rounds.
    pub fn rounds(&self) -> usize {
        self.records.len()
    }

    pub fn final_error(&self) -> f64 {
        self.records.last().unwrap_or(&self.initial).error
    }

    /// Errors of the completed rounds, in order.
    pub fn errors(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.error).collect()
    }

    pub fn t_predicted(&self) -> f64 {
        self.params.t_predicted
    }

    /// `iter,error,residual` with the initial state as iteration 0.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("iter,error,residual\n");
        for r in std::iter::once(&self.initial).chain(&self.records) {
            let _ = writeln!(out, "{},{},{}", r.iter, fmt_f64(r.error), fmt_f64(r.residual));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::Tuning;

    #[test]
    fn csv_layout() {
        let rec = |iter, error| TraceRecord {
            iter,
            error,
            residual: error / 2.0,
        };
        let t = IterationTrace {
            method: Method::Dgd,
            params: MethodParams::explicit(Method::Dgd, Tuning::Dgd { alpha: 0.5 }),
            error_kind: ErrorKind::Solution,
            initial: rec(0, 1.0),
            records: vec![rec(1, 0.5), rec(2, 0.25)],
            converged: false,
            fitted_rate: None,
            t_empirical: None,
            x: vec![],
            iterates: None,
        };
        assert_eq!(t.to_csv(), "iter,error,residual\n0,1.0,0.5\n1,0.5,0.25\n2,0.25,0.125\n");
        assert_eq!(t.rounds(), 2);
        assert_eq!(t.final_error(), 0.25);
    }
}
