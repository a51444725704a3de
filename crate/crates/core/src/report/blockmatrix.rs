use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::ingest::{GaussianStream, PartitionedSystem};
use crate::linalg::{quadratic_roots, solve_shifted, DenseMatrix, ShiftedSolve};
use crate::solvers::init_worker;

/// Largest `(m + 1) n` assembled for verification.
pub const MAX_ORDER: usize = 2000;
/// `||z||` at or above this certifies `B - lambda I` as singular.
pub const SINGULAR_NORM: f64 = 1e8;

/// The `(m+1)n x (m+1)n` map taking `(e_1, .., e_m, e_bar)` one APC round forward.
#[derive(Clone, Debug)]
pub struct BlockIterationMatrix {
    pub b: DenseMatrix,
    pub gamma: f64,
    pub eta: f64,
    pub m: usize,
    pub n: usize,
    /// `(eta gamma / m) sum_i P_i + (1 - eta) I`.
    pub master_block: DenseMatrix,
}

fn projector(sys: &PartitionedSystem, i: usize) -> Result<DenseMatrix> {
    let blk = &sys.blocks()[i];
    let w = init_worker(i, &blk.a, &blk.b)?;
    let n = sys.n();
    let mut p = DenseMatrix::zeros(n, n);
    let mut e = vec![0.0; n];
    for k in 0..n {
        e[k] = 1.0;
        let col = w.project(&e);
        for r in 0..n {
            p[(r, k)] = col[r];
        }
        e[k] = 0.0;
    }
    Ok(p)
}

/// Materializes every `P_i`, so only for small systems.
pub fn assemble_block_matrix(sys: &PartitionedSystem, gamma: f64, eta: f64) -> Result<BlockIterationMatrix> {
    let (m, n) = (sys.m(), sys.n());
    let order = (m + 1) * n;
    if order > MAX_ORDER {
        return Err(Error::TooLarge {
            order,
            limit: MAX_ORDER,
        });
    }
    let mut b = DenseMatrix::zeros(order, order);
    let mut master = DenseMatrix::identity(n);
    master.scale(1.0 - eta);
    let bottom = m * n;
    for i in 0..m {
        let p = projector(sys, i)?;
        master.add_scaled(eta * gamma / m as f64, &p)?;
        for r in 0..n {
            b[(i * n + r, i * n + r)] = 1.0 - gamma;
            b[(bottom + r, i * n + r)] = eta * (1.0 - gamma) / m as f64;
            for c in 0..n {
                b[(i * n + r, bottom + c)] = gamma * p[(r, c)];
            }
        }
    }
    for r in 0..n {
        for c in 0..n {
            b[(bottom + r, bottom + c)] = master[(r, c)];
        }
    }
    Ok(BlockIterationMatrix {
        b,
        gamma,
        eta,
        m,
        n,
        master_block: master,
    })
}

/// `(m - 1) n` copies of `1 - gamma`, then both roots of every per-`mu` quadratic.
pub fn predicted_spectrum(gamma: f64, eta: f64, mu: &[f64], m: usize, n: usize) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(1.0 - gamma, 0.0); m.saturating_sub(1) * n];
    for &u in mu {
        let b1 = -eta * gamma * (1.0 - u) + gamma - 1.0 + eta - 1.0;
        let c0 = (gamma - 1.0) * (eta - 1.0);
        out.extend(quadratic_roots(b1, c0).iter());
    }
    out
}

#[derive(Clone, Debug, Serialize)]
pub struct EigenCheck {
    pub re: f64,
    pub im: f64,
    /// `||z||`, infinite when elimination hit a collapsed pivot.
    pub z_norm: f64,
    pub accepted: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct SpectrumVerification {
    pub checks: Vec<EigenCheck>,
}

/// Certifies each predicted value as an eigenvalue of `B` by solving
/// `(B - lambda I) z = r` for a seeded random unit `r`.
pub fn verify_spectrum(bm: &BlockIterationMatrix, predicted: &[Complex64], seed: u64) -> Result<SpectrumVerification> {
    let order = bm.b.rows();
    let mut rng = GaussianStream::new(seed);
    let mut r: Vec<Complex64> = (0..order)
        .map(|_| Complex64::new(rng.standard_normal(), rng.standard_normal()))
        .collect();
    let s = r.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
    for v in &mut r {
        *v /= s;
    }
    let collapse = 1e-14 * bm.b.frobenius_norm().max(1.0);
    let mut cache: Vec<(Complex64, f64)> = Vec::new();
    let mut checks = Vec::with_capacity(predicted.len());
    for &lam in predicted {
        let z_norm = match cache.iter().find(|(v, _)| *v == lam) {
            Some(&(_, z)) => z,
            None => {
                let z = match solve_shifted(&bm.b, lam, &r, collapse) {
                    ShiftedSolve::Solved(z) => z.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt(),
                    ShiftedSolve::PivotCollapse { .. } => f64::INFINITY,
                };
                cache.push((lam, z));
                z
            }
        };
        checks.push(EigenCheck {
            re: lam.re,
            im: lam.im,
            z_norm,
            accepted: !(z_norm < SINGULAR_NORM),
        });
    }
    let rejected: Vec<(f64, f64)> = checks.iter().filter(|c| !c.accepted).map(|c| (c.re, c.im)).collect();
    if rejected.is_empty() {
        Ok(SpectrumVerification { checks })
    } else {
        Err(Error::VerificationFailed { rejected })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::partition_rows;
    use crate::linalg::dist;
    use crate::solvers::{average, master_round, worker_round, Kernel, MasterState};
    use crate::spectral::compute_x;

    fn e1() -> PartitionedSystem {
        let a = DenseMatrix::from_rows(&[[1.0, 0.0], [1.0, 1.0]]);
        partition_rows(&a, &[1.0, 2.0], 2, Some(vec![1.0, 1.0])).unwrap()
    }

    #[test]
    fn block_matrix_matches_one_round() {
        let sys = e1();
        let (gamma, eta) = (0.7, 1.6);
        let bm = assemble_block_matrix(&sys, gamma, eta).unwrap();
        assert_eq!(bm.b.rows(), 6);
        let x_star = [1.0, 1.0];
        let kernel = Kernel::Apc { gamma, eta };
        let mut workers: Vec<_> = sys
            .blocks()
            .iter()
            .enumerate()
            .map(|(i, b)| init_worker(i, &b.a, &b.b).unwrap())
            .collect();
        let sols: Vec<Vec<f64>> = workers.iter().map(|w| w.x.clone()).collect();
        let mut ms = MasterState::new(&kernel, average(&sols, 2));
        // stacked error before the round
        let mut e: Vec<f64> = Vec::new();
        for w in &workers {
            e.extend(w.x.iter().zip(&x_star).map(|(a, b)| a - b));
        }
        e.extend(ms.x_bar.iter().zip(&x_star).map(|(a, b)| a - b));
        let be = bm.b.mat_vec(&e).unwrap();

        let resp: Vec<Vec<f64>> = workers
            .iter_mut()
            .map(|w| worker_round(&kernel, w, &ms.x_bar))
            .collect();
        master_round(&kernel, &mut ms, &resp);
        let mut after: Vec<f64> = Vec::new();
        for w in &workers {
            after.extend(w.x.iter().zip(&x_star).map(|(a, b)| a - b));
        }
        after.extend(ms.x_bar.iter().zip(&x_star).map(|(a, b)| a - b));
        assert!(dist(&be, &after) < 1e-14);
    }

    #[test]
    fn degenerate_parameters() {
        let sys = e1();
        let bm = assemble_block_matrix(&sys, 0.0, 0.8).unwrap();
        for i in 0..4 {
            assert_eq!(bm.b[(i, i)], 1.0);
        }
        let bm = assemble_block_matrix(&sys, 0.6, 0.0).unwrap();
        assert_eq!(bm.master_block, DenseMatrix::identity(2));
    }

    #[test]
    fn too_large() {
        let a = DenseMatrix::identity(1001);
        let sys = partition_rows(&a, &vec![1.0; 1001], 1, None).unwrap();
        assert!(matches!(
            assemble_block_matrix(&sys, 1.0, 1.0),
            Err(Error::TooLarge { order: 2002, .. })
        ));
    }

    #[test]
    fn predicted_examples() {
        let mu = [0.2, 0.6];
        let p = predicted_spectrum(1.0, 1.4, &mu, 3, 2);
        assert_eq!(p.len(), 8);
        assert!(p[..4].iter().all(|v| *v == Complex64::new(0.0, 0.0)));

        let g = 4.0 - 2.0 * 2f64.sqrt();
        let mu = [0.146_446_609_406_726_24, 0.853_553_390_593_273_8];
        let p = predicted_spectrum(g, 2.0, &mu, 2, 2);
        assert_eq!(p.len(), 6);
        assert!(p[..2].iter().all(|v| (v.re - (2.0 * 2f64.sqrt() - 3.0)).abs() < 1e-15));
        for v in &p[2..] {
            assert!((v.norm() - 0.414214).abs() < 1e-6);
        }
        assert_eq!(predicted_spectrum(0.5, 1.0, &mu, 1, 2).len(), 4);
    }

    #[test]
    fn e1_optimal_spectrum_certified() {
        let sys = e1();
        let s = compute_x(&sys).unwrap();
        let g = 4.0 - 2.0 * 2f64.sqrt();
        let bm = assemble_block_matrix(&sys, g, 2.0).unwrap();
        let p = predicted_spectrum(g, 2.0, &s.mu, 2, 2);
        let v = verify_spectrum(&bm, &p, 1).unwrap();
        assert_eq!(v.checks.len(), 6);

        let off: Vec<Complex64> = p.iter().map(|v| v + 0.1).collect();
        match verify_spectrum(&bm, &off, 1) {
            Err(Error::VerificationFailed { rejected }) => assert_eq!(rejected.len(), 6),
            other => panic!("{other:?}"),
        }
    }
}
