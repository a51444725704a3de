use crate::error::{Error, Result};
use crate::ingest::PartitionedSystem;
use crate::linalg::{cholesky_spd, lanczos_max_eig, sym_eigen_decomp, sym_eigs, DenseMatrix};

use super::baselines::golden_min;
use super::{Method, MethodParams, Tuning};

const LANCZOS_STEPS: usize = 96;
const GRID: usize = 200;

/// The modified-ADMM error map
/// `G(xi) = (1/m) sum_i (I - W_i^T (D_i + xi)^{-1} W_i)`, where
/// `A_i A_i^T = U_i D_i U_i^T` and `W_i = U_i^T A_i`.
///
/// Each block is diagonalized once so that `G(xi) v` costs `O(pn)` per block
/// for any `xi`.
#[derive(Clone, Debug)]
pub struct AdmmOperator {
    n: usize,
    blocks: Vec<(Vec<f64>, DenseMatrix)>,
}

impl AdmmOperator {
    pub fn new(sys: &PartitionedSystem) -> Result<Self> {
        let blocks = sys
            .blocks()
            .iter()
            .map(|b| {
                let eig = sym_eigen_decomp(&b.a.gram_rows())?;
                let w = eig.vectors.transpose().matmul(&b.a)?;
                Ok((eig.values, w))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(AdmmOperator { n: sys.n(), blocks })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// `out = G(xi) v`.
    pub fn apply(&self, xi: f64, v: &[f64], out: &mut [f64]) {
        let m = self.blocks.len() as f64;
        out.copy_from_slice(v);
        let mut acc = vec![0.0; self.n];
        for (d, w) in &self.blocks {
            let mut c = w.mat_vec(v).expect("operator dimensions");
            for (ck, dk) in c.iter_mut().zip(d) {
                *ck /= dk + xi;
            }
            let mut t = vec![0.0; self.n];
            w.transpose_mat_vec_into(&c, &mut t);
            for (a, ti) in acc.iter_mut().zip(&t) {
                *a += ti;
            }
        }
        for (o, a) in out.iter_mut().zip(&acc) {
            *o -= a / m;
        }
    }
}

fn start_vector(n: usize) -> Vec<f64> {
    (0..n)
        .map(|j| 1.0 + 0.25 * ((j as f64 + 1.0) * 0.7548776662).sin())
        .collect()
}

/// Spectral radius of `G(xi)`. `G` is symmetric positive semidefinite, so this
/// is its largest eigenvalue.
pub fn admm_radius(op: &AdmmOperator, xi: f64) -> Result<f64> {
    let n = op.dim();
    lanczos_max_eig(n, LANCZOS_STEPS.min(n), &start_vector(n), |v, out| op.apply(xi, v, out))
}

/// Reference radius from the direct definition `(xi/m) sum_i (A_i^T A_i + xi I)^{-1}`.
pub fn admm_radius_dense(sys: &PartitionedSystem, xi: f64) -> Result<f64> {
    let g = admm_matrix_dense(sys, xi)?;
    let eig = sym_eigs(&g)?;
    Ok(eig.iter().fold(0.0f64, |a, v| a.max(v.abs())))
}

pub(crate) fn admm_matrix_dense(sys: &PartitionedSystem, xi: f64) -> Result<DenseMatrix> {
    let n = sys.n();
    let mut g = DenseMatrix::zeros(n, n);
    for b in sys.blocks() {
        let mut h = b.a.gram_cols();
        for i in 0..n {
            h[(i, i)] += xi;
        }
        let f = cholesky_spd(&h)?;
        let mut inv = DenseMatrix::identity(n);
        for r in 0..n {
            f.solve_in_place(inv.row_mut(r));
        }
        g.add_scaled(xi / sys.m() as f64, &inv)?;
    }
    for i in 0..n {
        for j in 0..i {
            let v = 0.5 * (g[(i, j)] + g[(j, i)]);
            g[(i, j)] = v;
            g[(j, i)] = v;
        }
    }
    Ok(g)
}

/// Default penalty search range around the scale of `A^T A`.
pub fn admm_default_range(lambda_max: f64) -> (f64, f64) {
    (1e-4 * lambda_max, 1e4 * lambda_max)
}

/// Penalty minimizing the radius of `G(xi)`: log grid then golden section in
/// `ln xi` around the best grid point.
pub fn admm_tune(sys: &PartitionedSystem, range: (f64, f64)) -> Result<MethodParams> {
    let (lo, hi) = range;
    if !(lo > 0.0 && hi > lo) {
        return Err(Error::InvalidParameter(format!(
            "ADMM penalty range ({lo}, {hi}) must satisfy 0 < lo < hi"
        )));
    }
    let op = AdmmOperator::new(sys)?;
    let (ll, lh) = (lo.ln(), hi.ln());
    let step = (lh - ll) / (GRID - 1) as f64;
    let mut best = (f64::INFINITY, 0usize);
    for i in 0..GRID {
        let r = admm_radius(&op, (ll + step * i as f64).exp())?;
        if r < best.0 {
            best = (r, i);
        }
    }
    let a = ll + step * best.1.saturating_sub(1) as f64;
    let b = ll + step * (best.1 + 1).min(GRID - 1) as f64;
    let (t, r) = golden_min(a, b, 60, |t| admm_radius(&op, t.exp()).unwrap_or(f64::INFINITY));
    let (xi, rho) = if r <= best.0 {
        (t.exp(), r)
    } else {
        ((ll + step * best.1 as f64).exp(), best.0)
    };
    if !(rho < 1.0 - 1e-12) {
        return Err(Error::TuningFailed(format!(
            "ADMM radius {rho} is not below 1 for any penalty in [{lo:e}, {hi:e}]"
        )));
    }
    Ok(MethodParams::new(Method::Admm, Tuning::Admm { xi }, rho))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::{partition_rows, synth_gaussian};

    fn e1() -> PartitionedSystem {
        let a = DenseMatrix::from_rows(&[[1.0, 0.0], [1.0, 1.0]]);
        partition_rows(&a, &[1.0, 2.0], 2, None).unwrap()
    }

    #[test]
    fn e1_unit_penalty() {
        let sys = e1();
        let g = admm_matrix_dense(&sys, 1.0).unwrap();
        let want = DenseMatrix::from_rows(&[[7.0 / 12.0, -1.0 / 6.0], [-1.0 / 6.0, 5.0 / 6.0]]);
        assert!(g.max_abs_diff(&want) < 1e-15);
        let r = admm_radius(&AdmmOperator::new(&sys).unwrap(), 1.0).unwrap();
        assert!((r - 11.0 / 12.0).abs() < 1e-12);
    }

    #[test]
    fn operator_matches_dense_matrix() {
        let s = synth_gaussian(4, 4, 0.0, 11).unwrap();
        let sys = partition_rows(&s.a, &s.b, 2, None).unwrap();
        let op = AdmmOperator::new(&sys).unwrap();
        for xi in [0.01, 0.3, 2.0, 40.0] {
            let g = admm_matrix_dense(&sys, xi).unwrap();
            for k in 0..4 {
                let mut e = vec![0.0; 4];
                e[k] = 1.0;
                let mut out = vec![0.0; 4];
                op.apply(xi, &e, &mut out);
                for r in 0..4 {
                    assert!((out[r] - g[(r, k)]).abs() < 1e-10);
                }
            }
            let r = admm_radius(&op, xi).unwrap();
            let rd = admm_radius_dense(&sys, xi).unwrap();
            assert!((r - rd).abs() < 1e-10);
            assert!(r > 0.0 && r < 1.0);
        }
    }

    #[test]
    fn orthogonal_single_block() {
        let sys = partition_rows(&DenseMatrix::identity(3), &[1.0; 3], 1, None).unwrap();
        let op = AdmmOperator::new(&sys).unwrap();
        let mut prev = 0.0;
        for xi in [0.1, 1.0, 10.0] {
            let r = admm_radius(&op, xi).unwrap();
            assert!((r - xi / (1.0 + xi)).abs() < 1e-14);
            assert!(r > prev);
            prev = r;
        }
    }

    #[test]
    fn tuned_penalty_beats_unit_penalty_on_e1() {
        let sys = e1();
        let p = admm_tune(&sys, admm_default_range(2.618034)).unwrap();
        assert!(p.rho <= 11.0 / 12.0 + 1e-12);
        assert!(p.t_predicted <= 11.49);
        let Tuning::Admm { xi } = p.tuning else { unreachable!() };
        assert!((admm_radius_dense(&sys, xi).unwrap() - p.rho).abs() < 1e-12);
    }

    #[test]
    fn bad_range() {
        assert!(matches!(admm_tune(&e1(), (0.0, 1.0)), Err(Error::InvalidParameter(_))));
    }
}
