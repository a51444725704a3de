use crate::error::{Error, Result};
use crate::solvers::IterationTrace;

/// Fewest records a rate fit accepts.
pub const MIN_RECORDS: usize = 20;
/// Leading records always excluded from the fit.
pub const TRANSIENT: usize = 10;

/// Least-squares slope of `ln(error)` against the iteration index over the
/// tail window, returned as `exp(slope)`.
///
/// The window is the last half of `errors`, and never includes the first
/// [`TRANSIENT`] entries.
pub fn fit_tail(errors: &[f64]) -> Result<f64> {
    let k = errors.len();
    if k < MIN_RECORDS {
        return Err(Error::InsufficientData(format!(
            "{k} records, need at least {MIN_RECORDS}"
        )));
    }
    let start = TRANSIENT.max(k / 2);
    let window = &errors[start..];
    if window.iter().any(|e| !(*e > 0.0) || !e.is_finite()) {
        return Err(Error::InsufficientData(
            "tail contains zero or non-finite errors".into(),
        ));
    }
    let len = window.len() as f64;
    let t_mean = (start as f64 + (k - 1) as f64) / 2.0;
    let y: Vec<f64> = window.iter().map(|e| e.ln()).collect();
    let y_mean = y.iter().sum::<f64>() / len;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (j, yj) in y.iter().enumerate() {
        let dt = (start + j) as f64 - t_mean;
        sxy += dt * (yj - y_mean);
        sxx += dt * dt;
    }
    Ok((sxy / sxx).exp())
}

/// Empirical rate of a run. A converged run's last record, the one that
/// crossed the tolerance, is left out.
pub fn fit_rate(trace: &IterationTrace) -> Result<f64> {
    let mut errors = trace.errors();
    if trace.converged {
        errors.pop();
    }
    fit_tail(&errors)
}
