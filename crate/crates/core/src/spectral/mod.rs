//! Spectral analysis: the averaged projector complement `X`, its condition
//! number, and the optimal parameters and rates of every method.

mod admm;
mod apc;
mod baselines;
mod params;

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::ingest::PartitionedSystem;
use crate::linalg::{cholesky_spd, sym_eigs, DenseMatrix, RowBasis};

pub use admm::{admm_default_range, admm_radius, admm_radius_dense, admm_tune, AdmmOperator};
pub use apc::{apc_optimal_params, apc_spectral_radius, theorem_residuals, StabilityVerdict};
pub use baselines::{
    cimmino_params, consensus_rate, dgd_params, dhbm_companion_radius, dhbm_params, dnag_companion_radius, dnag_params,
    DNAG_MATCH_TOL,
};
pub use params::{Method, MethodParams, Tuning};

/// Spectra and condition numbers that govern every method's rate.
#[derive(Clone, Debug, Serialize)]
pub struct SpectralSummary {
    #[serde(skip)]
    pub x: DenseMatrix,
    /// Eigenvalues of `X`, ascending.
    #[serde(skip)]
    pub mu: Vec<f64>,
    pub mu_min: f64,
    pub mu_max: f64,
    #[serde(rename = "kappa_X")]
    pub kappa_x: f64,
    /// Eigenvalues of `A^T A`, ascending.
    #[serde(skip)]
    pub lambda_ata: Vec<f64>,
    #[serde(rename = "lambda_min_AtA")]
    pub lambda_min: f64,
    #[serde(rename = "lambda_max_AtA")]
    pub lambda_max: f64,
    #[serde(rename = "kappa_AtA")]
    pub kappa_ata: f64,
    #[serde(rename = "trace_X")]
    pub trace_x: f64,
}

/// `1 / -ln(rho)`; zero for `rho <= 0`, infinite for `rho >= 1`.
pub fn convergence_time(rho: f64) -> f64 {
    if rho.is_nan() {
        f64::NAN
    } else if rho <= 0.0 {
        0.0
    } else if rho >= 1.0 {
        f64::INFINITY
    } else {
        1.0 / -rho.ln()
    }
}

/// `max / min`, infinite when the minimum is not positive.
pub fn condition_number(ascending: &[f64]) -> f64 {
    let (lo, hi) = (ascending[0], ascending[ascending.len() - 1]);
    if lo <= 0.0 {
        f64::INFINITY
    } else {
        hi / lo
    }
}

/// `X = (1/m) sum_i A_i^T (A_i A_i^T)^{-1} A_i`, accumulated as `Q_i Q_i^T` from an
/// orthonormal basis of each block's row space.
pub fn projector_average(sys: &PartitionedSystem) -> Result<DenseMatrix> {
    let n = sys.n();
    let mut x = DenseMatrix::zeros(n, n);
    for (i, block) in sys.blocks().iter().enumerate() {
        cholesky_spd(&block.a.gram_rows()).map_err(|_| Error::RankDeficientBlock { block: i })?;
        RowBasis::new(&block.a).accumulate_projector(1.0, &mut x);
    }
    x.scale(1.0 / sys.m() as f64);
    // exact symmetry for the eigensolver
    for i in 0..n {
        for j in 0..i {
            let v = 0.5 * (x[(i, j)] + x[(j, i)]);
            x[(i, j)] = v;
            x[(j, i)] = v;
        }
    }
    Ok(x)
}

/// Spectral summary of `X` and `A^T A`.
pub fn compute_x(sys: &PartitionedSystem) -> Result<SpectralSummary> {
    let x = projector_average(sys)?;
    let mu = sym_eigs(&x)?;
    let lambda_ata = sym_eigs(&sys.a().gram_cols())?;
    Ok(summarize(x, mu, lambda_ata))
}

fn summarize(x: DenseMatrix, mu: Vec<f64>, lambda_ata: Vec<f64>) -> SpectralSummary {
    let n = mu.len();
    SpectralSummary {
        trace_x: x.trace(),
        mu_min: mu[0],
        mu_max: mu[n - 1],
        kappa_x: condition_number(&mu),
        lambda_min: lambda_ata[0],
        lambda_max: lambda_ata[n - 1],
        kappa_ata: condition_number(&lambda_ata),
        x,
        mu,
        lambda_ata,
    }
}

/// One method's entry in an analysis report, or the reason it could not be tuned.
#[derive(Clone, Debug, Serialize)]
#[serde(untagged)]
pub enum MethodReport {
    Tuned(MethodParams),
    Failed { method: Method, error: String },
}

/// Summary plus optimal parameters for a set of methods.
#[derive(Clone, Debug, Serialize)]
pub struct AnalysisReport {
    pub n: usize,
    pub rows: usize,
    pub m: usize,
    pub p: usize,
    pub summary: SpectralSummary,
    pub methods: BTreeMap<Method, MethodReport>,
}

/// Optimal parameters of `method` for `sys`, given its spectral summary.
pub fn optimal_params(sys: &PartitionedSystem, summary: &SpectralSummary, method: Method) -> Result<MethodParams> {
    match method {
        Method::Apc => apc_optimal_params(summary.mu_min, summary.mu_max),
        Method::Consensus => {
            if summary.mu_min <= 0.0 {
                return Err(Error::DegenerateSpectrum("mu_min <= 0".into()));
            }
            Ok(MethodParams::new(
                Method::Consensus,
                Tuning::Apc { gamma: 1.0, eta: 1.0 },
                consensus_rate(summary.mu_min),
            ))
        }
        Method::Dgd => dgd_params(&summary.lambda_ata),
        Method::Dnag => dnag_params(&summary.lambda_ata),
        Method::Dhbm => dhbm_params(&summary.lambda_ata),
        Method::Cimmino => cimmino_params(&summary.mu, sys.m()),
        Method::Admm => admm_tune(sys, admm_default_range(summary.lambda_max)),
        Method::Pdhbm => {
            // C^T C = m X, so its spectrum is m * mu
            let scaled: Vec<f64> = summary.mu.iter().map(|v| v * sys.m() as f64).collect();
            let mut p = dhbm_params(&scaled)?;
            p.method = Method::Pdhbm;
            Ok(p)
        }
    }
}

/// Fills in the predicted rate of hand-set parameters.
pub fn predicted_params(
    sys: &PartitionedSystem,
    summary: &SpectralSummary,
    params: MethodParams,
) -> Result<MethodParams> {
    let m = sys.m() as f64;
    let rho = match (params.method, params.tuning) {
        (Method::Apc | Method::Consensus, Tuning::Apc { gamma, eta }) => {
            apc_spectral_radius(gamma, eta, &summary.mu).spectral_radius
        }
        (Method::Dgd, Tuning::Dgd { alpha }) => summary
            .lambda_ata
            .iter()
            .fold(0.0, |r: f64, l| r.max((1.0 - alpha * l).abs())),
        (Method::Dnag, Tuning::Momentum { alpha, beta }) => dnag_companion_radius(alpha, beta, &summary.lambda_ata),
        (Method::Dhbm, Tuning::Momentum { alpha, beta }) => dhbm_companion_radius(alpha, beta, &summary.lambda_ata),
        (Method::Pdhbm, Tuning::Momentum { alpha, beta }) => {
            let scaled: Vec<f64> = summary.mu.iter().map(|v| v * m).collect();
            dhbm_companion_radius(alpha, beta, &scaled)
        }
        (Method::Cimmino, Tuning::Cimmino { nu }) => {
            summary.mu.iter().fold(0.0, |r: f64, u| r.max((1.0 - nu * m * u).abs()))
        }
        (Method::Admm, Tuning::Admm { xi }) => admm_radius(&AdmmOperator::new(sys)?, xi)?,
        (method, tuning) => {
            return Err(Error::InvalidParameter(format!(
                "parameters {tuning:?} do not apply to method {method}"
            )))
        }
    };
    Ok(MethodParams::new(params.method, params.tuning, rho))
}

pub fn analyze(sys: &PartitionedSystem, methods: &[Method]) -> Result<AnalysisReport> {
    let summary = compute_x(sys)?;
    let methods = methods
        .iter()
        .map(|&m| {
            let r = match optimal_params(sys, &summary, m) {
                Ok(p) => MethodReport::Tuned(p),
                Err(e) => MethodReport::Failed {
                    method: m,
                    error: e.to_string(),
                },
            };
            (m, r)
        })
        .collect();
    Ok(AnalysisReport {
        n: sys.n(),
        rows: sys.rows(),
        m: sys.m(),
        p: sys.p(),
        summary,
        methods,
    })
}
