//! Closed-form and numerically tuned parameters for the gradient-type and
//! row-projection baselines.

use crate::error::{Error, Result};
use crate::linalg::quadratic_roots;

use super::{condition_number, Method, MethodParams, Tuning};

/// Relative gap allowed between the tuned D-NAG radius and `1 - 2/sqrt(3k + 1)`.
pub const DNAG_MATCH_TOL: f64 = 1e-4;
const DHBM_MATCH_TOL: f64 = 1e-8;

fn extremes(ascending: &[f64], what: &str) -> Result<(f64, f64)> {
    let (Some(&lo), Some(&hi)) = (ascending.first(), ascending.last()) else {
        return Err(Error::DegenerateSpectrum(format!("empty {what} spectrum")));
    };
    if !(lo > 0.0) {
        return Err(Error::DegenerateSpectrum(format!(
            "smallest {what} eigenvalue is {lo:e}"
        )));
    }
    Ok((lo, hi))
}

pub fn dgd_params(lambda: &[f64]) -> Result<MethodParams> {
    let (lo, hi) = extremes(lambda, "A^T A")?;
    let k = hi / lo;
    let alpha = 2.0 / (hi + lo);
    let rho = (k - 1.0) / (k + 1.0);
    let (a, b) = ((1.0 - alpha * lo).abs(), (1.0 - alpha * hi).abs());
    if (a - rho).abs() > 1e-12 || (b - rho).abs() > 1e-12 {
        return Err(Error::TuningFailed(format!(
            "DGD endpoint moduli ({a}, {b}) differ from {rho}"
        )));
    }
    Ok(MethodParams::new(Method::Dgd, Tuning::Dgd { alpha }, rho))
}

/// Spectral radius of the D-NAG error recursion
/// `e(t+1) = (1+beta)(I - alpha H) e(t) - beta (I - alpha H) e(t-1)`,
/// via one quadratic per eigenvalue of `H`.
pub fn dnag_companion_radius(alpha: f64, beta: f64, lambda: &[f64]) -> f64 {
    lambda
        .iter()
        .map(|&l| {
            let q = 1.0 - alpha * l;
            quadratic_roots(-(1.0 + beta) * q, beta * q).max_modulus()
        })
        .fold(0.0, f64::max)
}

/// Spectral radius of the heavy-ball recursion
/// `e(t+1) = (1 + beta - alpha H) e(t) - beta e(t-1)`.
pub fn dhbm_companion_radius(alpha: f64, beta: f64, lambda: &[f64]) -> f64 {
    lambda
        .iter()
        .map(|&l| quadratic_roots(-(1.0 + beta - alpha * l), beta).max_modulus())
        .fold(0.0, f64::max)
}

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Golden-section minimum of a unimodal `f` on `[lo, hi]`.
pub(crate) fn golden_min(mut lo: f64, mut hi: f64, iters: usize, f: impl Fn(f64) -> f64) -> (f64, f64) {
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..iters {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2);
        }
    }
    if f1 <= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// Best momentum for a fixed step: golden section over `beta` in `[0, 1)`.
fn dnag_best_beta(alpha: f64, lambda: &[f64]) -> (f64, f64) {
    golden_min(0.0, 1.0 - 1e-15, 90, |b| dnag_companion_radius(alpha, b, lambda))
}

/// D-NAG `(alpha, beta)` by direct minimization of the companion radius:
/// a 200-point grid over `alpha` in `(0, 2/lambda_max)` with an inner golden
/// section over `beta`, then golden refinement of `alpha` around the best cell.
pub fn dnag_params(lambda: &[f64]) -> Result<MethodParams> {
    let (lo, hi) = extremes(lambda, "A^T A")?;
    let k = hi / lo;
    let predicted = 1.0 - 2.0 / (3.0 * k + 1.0).sqrt();

    // only the distinct extremes and interior values matter; dedup keeps large spectra cheap
    let mut spectrum = lambda.to_vec();
    spectrum.dedup_by(|a, b| (*a - *b).abs() <= 1e-15 * hi);

    let a_max = 2.0 / hi;
    const GRID: usize = 200;
    let step = a_max / GRID as f64;
    let mut best = (f64::INFINITY, 0usize);
    for i in 1..GRID {
        let (_, r) = dnag_best_beta(i as f64 * step, &spectrum);
        if r < best.0 {
            best = (r, i);
        }
    }
    let a_lo = (best.1 - 1) as f64 * step;
    let a_hi = (best.1 + 1) as f64 * step;
    let (alpha, _) = golden_min(a_lo.max(step * 1e-6), a_hi, 80, |a| dnag_best_beta(a, &spectrum).1);
    let (beta, achieved) = dnag_best_beta(alpha, &spectrum);

    let gap = (achieved - predicted).abs() / predicted.max(f64::MIN_POSITIVE);
    let gap = if predicted == 0.0 { achieved } else { gap };
    if gap > DNAG_MATCH_TOL {
        return Err(Error::TuningFailed(format!(
            "D-NAG search reached radius {achieved}, predicted {predicted}"
        )));
    }
    Ok(MethodParams::new(
        Method::Dnag,
        Tuning::Momentum { alpha, beta },
        predicted,
    ))
}

/// Heavy-ball tuning: `alpha = (2 / (sqrt L + sqrt mu))^2`, `beta = rho^2`.
pub fn dhbm_params(lambda: &[f64]) -> Result<MethodParams> {
    let (lo, hi) = extremes(lambda, "A^T A")?;
    let sk = (hi / lo).sqrt();
    let rho = (sk - 1.0) / (sk + 1.0);
    let alpha = (2.0 / (hi.sqrt() + lo.sqrt())).powi(2);
    let beta = rho * rho;
    let achieved = dhbm_companion_radius(alpha, beta, lambda);
    if (achieved - rho).abs() > DHBM_MATCH_TOL {
        return Err(Error::TuningFailed(format!(
            "heavy-ball radius {achieved} differs from {rho}"
        )));
    }
    Ok(MethodParams::new(Method::Dhbm, Tuning::Momentum { alpha, beta }, rho))
}

/// Block Cimmino with `nu = eta* / m`, `eta* = 2 / (mu_max + mu_min)`.
pub fn cimmino_params(mu: &[f64], m: usize) -> Result<MethodParams> {
    let (lo, hi) = extremes(mu, "X")?;
    let eta = 2.0 / (hi + lo);
    let k = condition_number(mu);
    let rho = (k - 1.0) / (k + 1.0);
    Ok(MethodParams::new(
        Method::Cimmino,
        Tuning::Cimmino { nu: eta / m as f64 },
        rho,
    ))
}

/// Rate of plain projection consensus (`gamma = eta = 1`).
pub fn consensus_rate(mu_min: f64) -> f64 {
    1.0 - mu_min
}
