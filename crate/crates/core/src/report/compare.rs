use std::fmt::Write as _;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fmt_f64;
use crate::ingest::PartitionedSystem;
use crate::simnet::run_simulated;
use crate::solvers::{run, Budget, IterationTrace, RunOptions};
use crate::spectral::{compute_x, optimal_params, Method, MethodParams, SpectralSummary};

/// How table rows are executed.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum RunMode {
    #[default]
    Sequential,
    Simulated,
}

/// One method's line in a comparison.
#[derive(Clone, Debug, Serialize)]
pub struct ComparisonRow {
    pub method: Method,
    pub params: Option<MethodParams>,
    pub rho: Option<f64>,
    #[serde(rename = "T_predicted")]
    pub t_predicted: Option<f64>,
    #[serde(rename = "T_empirical")]
    pub t_empirical: Option<f64>,
    pub fitted_rate: Option<f64>,
    /// Rounds run; equals rounds to tolerance when `converged`.
    pub iters: Option<usize>,
    pub converged: bool,
    pub final_error: Option<f64>,
    /// Smallest predicted convergence time in the table.
    pub minimal: bool,
    pub error: Option<String>,
    #[serde(skip)]
    pub trace: Option<IterationTrace>,
}

impl ComparisonRow {
    fn failed(method: Method, params: Option<MethodParams>, e: &Error) -> Self {
        ComparisonRow {
            method,
            params,
            rho: params.map(|p| p.rho),
            t_predicted: params.map(|p| p.t_predicted),
            t_empirical: None,
            fitted_rate: None,
            iters: None,
            converged: false,
            final_error: None,
            minimal: false,
            error: Some(e.to_string()),
            trace: match e {
                Error::Diverged { trace, .. } => Some((**trace).clone()),
                _ => None,
            },
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ComparisonTable {
    pub n: usize,
    pub rows_a: usize,
    pub m: usize,
    #[serde(rename = "kappa_X")]
    pub kappa_x: f64,
    #[serde(rename = "kappa_AtA")]
    pub kappa_ata: f64,
    pub rows: Vec<ComparisonRow>,
}

fn opt(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_default()
}

impl ComparisonTable {
    pub fn row(&self, method: Method) -> Option<&ComparisonRow> {
        self.rows.iter().find(|r| r.method == method)
    }

    /// `method,rho,T_predicted,T_empirical,iters`; failed cells are empty.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("method,rho,T_predicted,T_empirical,iters\n");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                r.method,
                opt(r.rho),
                opt(r.t_predicted),
                opt(r.t_empirical),
                r.iters.map(|i| i.to_string()).unwrap_or_default()
            );
        }
        out
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Tunes, runs and tabulates each method. A method that fails keeps its row
/// with the error attached.
pub fn build_comparison(
    sys: &PartitionedSystem,
    methods: &[Method],
    budget: Option<Budget>,
    mode: RunMode,
) -> Result<ComparisonTable> {
    if methods.is_empty() {
        return Err(Error::InvalidParameter("empty method set".into()));
    }
    let summary = compute_x(sys)?;
    let mut rows: Vec<ComparisonRow> = methods
        .iter()
        .map(|&m| comparison_row(sys, &summary, m, budget, mode))
        .collect();
    let best = rows
        .iter()
        .filter(|r| r.error.is_none())
        .filter_map(|r| r.t_predicted)
        .fold(f64::INFINITY, f64::min);
    for r in &mut rows {
        r.minimal = r.error.is_none() && r.t_predicted == Some(best);
    }
    Ok(ComparisonTable {
        n: sys.n(),
        rows_a: sys.rows(),
        m: sys.m(),
        kappa_x: summary.kappa_x,
        kappa_ata: summary.kappa_ata,
        rows,
    })
}

fn comparison_row(
    sys: &PartitionedSystem,
    summary: &SpectralSummary,
    method: Method,
    budget: Option<Budget>,
    mode: RunMode,
) -> ComparisonRow {
    let params = match optimal_params(sys, summary, method) {
        Ok(p) => p,
        Err(e) => return ComparisonRow::failed(method, None, &e),
    };
    let budget = budget.unwrap_or_else(|| Budget::for_time(params.t_predicted));
    let opts = RunOptions::default();
    let result = match mode {
        RunMode::Sequential => run(sys, &params, &budget, &opts),
        RunMode::Simulated => run_simulated(sys, &params, &budget, &opts, None).map(|r| r.trace),
    };
    match result {
        Ok(t) => ComparisonRow {
            method,
            params: Some(params),
            rho: Some(params.rho),
            t_predicted: Some(params.t_predicted),
            t_empirical: t.t_empirical,
            fitted_rate: t.fitted_rate,
            iters: Some(t.rounds()),
            converged: t.converged,
            final_error: Some(t.final_error()),
            minimal: false,
            error: None,
            trace: Some(t),
        },
        Err(e) => ComparisonRow::failed(method, Some(params), &e),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::partition_rows;
    use crate::linalg::DenseMatrix;

    fn e1() -> PartitionedSystem {
        let a = DenseMatrix::from_rows(&[[1.0, 0.0], [1.0, 1.0]]);
        partition_rows(&a, &[1.0, 2.0], 2, Some(vec![1.0, 1.0])).unwrap()
    }

    #[test]
    fn e1_table() {
        let t = build_comparison(&e1(), &Method::BENCH, None, RunMode::Sequential).unwrap();
        assert_eq!(t.rows.len(), 7);
        let tp = |m| t.row(m).unwrap().t_predicted.unwrap();
        // convergence_time of the closed-form rates
        assert!((tp(Method::Dgd) - 1.0 / -(0.745_355_992_499_929_9f64).ln()).abs() < 1e-6);
        assert!((tp(Method::Dnag) - 1.775).abs() < 1e-3);
        assert!((tp(Method::Dhbm) - 1.242).abs() < 1e-3);
        assert!((tp(Method::Cimmino) - 2.885).abs() < 1e-3);
        assert!((tp(Method::Apc) - 1.135).abs() < 1e-3);
        assert!(tp(Method::Admm) <= 11.49);
        let minimal: Vec<Method> = t.rows.iter().filter(|r| r.minimal).map(|r| r.method).collect();
        assert!(minimal.contains(&Method::Apc));
        assert!(t.rows.iter().all(|r| r.error.is_none()));
        let csv = t.to_csv();
        assert!(csv.starts_with("method,rho,T_predicted,T_empirical,iters\n"));
        assert_eq!(csv.lines().count(), 8);
    }

    #[test]
    fn single_method() {
        let t = build_comparison(&e1(), &[Method::Apc], None, RunMode::Sequential).unwrap();
        assert_eq!(t.rows.len(), 1);
        assert!(t.rows[0].minimal);
    }

    #[test]
    fn empty_set() {
        assert!(matches!(
            build_comparison(&e1(), &[], None, RunMode::Sequential),
            Err(Error::InvalidParameter(_))
        ));
    }
}
