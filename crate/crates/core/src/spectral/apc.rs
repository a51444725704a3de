use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::quadratic_roots;

use super::{Method, MethodParams, Tuning};

/// Tolerance on the two optimality equations.
const THEOREM_TOL: f64 = 1e-10;

/// Stability of APC at `(gamma, eta)` for a given spectrum of `X`.
#[derive(Clone, Debug, Serialize)]
pub struct StabilityVerdict {
    pub gamma: f64,
    pub eta: f64,
    /// Largest root modulus of each per-eigenvalue quadratic, in input order.
    pub root_moduli: Vec<f64>,
    /// `max(|1 - gamma|, max root modulus)`.
    pub spectral_radius: f64,
    pub stable: bool,
    /// `stable` and `gamma` in `[0, 2]`.
    pub in_stability_set: bool,
}

/// Per-eigenvalue characteristic quadratic of the APC error recursion:
/// `z^2 + (-eta gamma (1 - mu) + gamma - 1 + eta - 1) z + (gamma - 1)(eta - 1)`.
pub(crate) fn apc_quadratic(gamma: f64, eta: f64, mu: f64) -> (f64, f64) {
    let b1 = -eta * gamma * (1.0 - mu) + gamma - 1.0 + eta - 1.0;
    let c0 = (gamma - 1.0) * (eta - 1.0);
    (b1, c0)
}

pub fn apc_spectral_radius(gamma: f64, eta: f64, mu: &[f64]) -> StabilityVerdict {
    let root_moduli: Vec<f64> = mu
        .iter()
        .map(|&m| {
            let (b1, c0) = apc_quadratic(gamma, eta, m);
            quadratic_roots(b1, c0).max_modulus()
        })
        .collect();
    let spectral_radius = root_moduli.iter().copied().fold((1.0 - gamma).abs(), f64::max);
    let stable = spectral_radius < 1.0;
    StabilityVerdict {
        gamma,
        eta,
        root_moduli,
        spectral_radius,
        stable,
        in_stability_set: stable && (0.0..=2.0).contains(&gamma),
    }
}

/// Residuals of `mu_max eta gamma = (1 + sqrt c)^2` and
/// `mu_min eta gamma = (1 - sqrt c)^2` with `c = (gamma - 1)(eta - 1)`.
pub fn theorem_residuals(gamma: f64, eta: f64, mu_min: f64, mu_max: f64) -> (f64, f64) {
    let c = ((gamma - 1.0) * (eta - 1.0)).max(0.0).sqrt();
    let eg = eta * gamma;
    (mu_max * eg - (1.0 + c).powi(2), mu_min * eg - (1.0 - c).powi(2))
}

/// Optimal APC parameters in closed form.
///
/// `rho = (sqrt k - 1)/(sqrt k + 1)`, `gamma eta = (1 + rho)^2 / mu_max`,
/// `gamma + eta = gamma eta + 1 - rho^2`; `gamma` takes the smaller root.
pub fn apc_optimal_params(mu_min: f64, mu_max: f64) -> Result<MethodParams> {
    if !(mu_min > 0.0) {
        return Err(Error::DegenerateSpectrum(format!(
            "mu_min = {mu_min:e}: X is singular, APC cannot converge"
        )));
    }
    if mu_max < mu_min || mu_max > 1.0 + 1e-10 {
        return Err(Error::InvalidParameter(format!(
            "need 0 < mu_min <= mu_max <= 1, got ({mu_min}, {mu_max})"
        )));
    }
    let sk = (mu_max / mu_min).sqrt();
    let rho = (sk - 1.0) / (sk + 1.0);
    let product = (1.0 + rho).powi(2) / mu_max;
    let sum = product + 1.0 - rho * rho;
    // sum^2 - 4 product = (gamma - eta)^2, factored to avoid cancellation:
    // (1 + rho)^4 (1 - mu_max)(1 - mu_min) / mu_max^2
    let disc = (1.0 + rho).powi(2) * ((1.0 - mu_max).max(0.0) * (1.0 - mu_min).max(0.0)).sqrt() / mu_max;
    let eta = 0.5 * (sum + disc);
    // product / eta avoids cancellation in (sum - disc) / 2
    let gamma = product / eta;

    let (r1, r2) = theorem_residuals(gamma, eta, mu_min, mu_max);
    if r1.abs() > THEOREM_TOL || r2.abs() > THEOREM_TOL {
        return Err(Error::TuningFailed(format!(
            "optimality residuals ({r1:e}, {r2:e}) exceed {THEOREM_TOL:e}"
        )));
    }
    Ok(MethodParams::new(Method::Apc, Tuning::Apc { gamma, eta }, rho))
}

#[cfg(test)]
mod tests {
    use super::*;

    const MU_E1: [f64; 2] = [
        0.146_446_609_406_726_24, // (2 - sqrt 2) / 4
        0.853_553_390_593_273_8,  // (2 + sqrt 2) / 4
    ];

    #[test]
    fn verdict_examples() {
        let v = apc_spectral_radius(1.0, 1.0, &[0.25]);
        assert!((v.spectral_radius - 0.75).abs() < 1e-15);
        assert!(v.stable);

        let v = apc_spectral_radius(1.0, 1.0, &[0.0, 0.5]);
        assert!((v.spectral_radius - 1.0).abs() < 1e-15);
        assert!(!v.stable);

        let g = 4.0 - 2.0 * 2f64.sqrt();
        let v = apc_spectral_radius(g, 2.0, &MU_E1);
        for m in &v.root_moduli {
            assert!((m - 0.414214).abs() < 1e-6, "{m}");
        }
        assert!((v.spectral_radius - 0.414214).abs() < 1e-6);
        assert!(v.in_stability_set);
    }

    #[test]
    fn gamma_outside_range_is_flagged() {
        let v = apc_spectral_radius(2.5, 0.5, &[0.5]);
        assert!(!v.in_stability_set);
    }

    #[test]
    fn optimal_examples() {
        let p = apc_optimal_params(0.5, 0.5).unwrap();
        let Tuning::Apc { gamma, eta } = p.tuning else {
            unreachable!()
        };
        assert!(p.rho.abs() < 1e-15);
        assert!((gamma - 1.0).abs() < 1e-12 && (eta - 2.0).abs() < 1e-12);

        let p = apc_optimal_params(MU_E1[0], MU_E1[1]).unwrap();
        let Tuning::Apc { gamma, eta } = p.tuning else {
            unreachable!()
        };
        assert!((p.rho - (2f64.sqrt() - 1.0)).abs() < 1e-14);
        assert!((gamma - (4.0 - 2.0 * 2f64.sqrt())).abs() < 1e-12, "{gamma}");
        assert!((eta - 2.0).abs() < 1e-12, "{eta}");

        assert!(matches!(
            apc_optimal_params(0.0, 0.5),
            Err(Error::DegenerateSpectrum(_))
        ));
    }

    #[test]
    fn optimal_matches_grid_search() {
        // oracle: brute-force minimum of the spectral radius over a (gamma, eta) grid
        let mut best = (f64::INFINITY, 0.0, 0.0);
        for i in 0..=400 {
            let g = 0.5 + i as f64 * (1.5 / 400.0);
            for j in 0..=400 {
                let e = 0.5 + j as f64 * (2.5 / 400.0);
                let r = apc_spectral_radius(g, e, &MU_E1).spectral_radius;
                if r < best.0 {
                    best = (r, g, e);
                }
            }
        }
        let p = apc_optimal_params(MU_E1[0], MU_E1[1]).unwrap();
        assert!(best.0 >= p.rho - 1e-12);
        assert!(best.0 - p.rho < 5e-3, "{best:?}");
    }

    #[test]
    fn unit_gamma_gives_cimmino_radius() {
        let mu = [0.1, 0.3, 0.7];
        for eta in [0.5, 1.0, 1.5, 2.5] {
            let v = apc_spectral_radius(1.0, eta, &mu);
            let want = mu.iter().map(|m| (1.0 - eta * m).abs()).fold(0.0, f64::max);
            assert!((v.spectral_radius - want).abs() < 1e-15);
        }
    }
}
