//! Symmetric eigensolvers: cyclic Jacobi for the full spectrum, Lanczos for
//! extreme eigenvalues of an implicitly applied operator.

use crate::error::{Error, Result};

use super::cholesky::SYMMETRY_TOL;
use super::dense::{axpy, dot, norm, DenseMatrix};

/// Off-diagonal Frobenius mass, relative to `||M||_F`, at which sweeps stop.
pub const OFF_DIAGONAL_TOL: f64 = 1e-12;
const MAX_SWEEPS: usize = 100;

/// Eigenvalues and (column) eigenvectors of a symmetric matrix.
#[derive(Clone, Debug)]
pub struct SymEigen {
    /// Ascending.
    pub values: Vec<f64>,
    /// Column `k` is the unit eigenvector for `values[k]`.
    pub vectors: DenseMatrix,
}

/// All eigenvalues of a symmetric matrix, ascending.
pub fn sym_eigs(m: &DenseMatrix) -> Result<Vec<f64>> {
    m.check_symmetric(SYMMETRY_TOL)?;
    let mut a = m.clone();
    jacobi_sweeps(&mut a, None)?;
    let mut vals: Vec<f64> = (0..a.rows()).map(|i| a[(i, i)]).collect();
    vals.sort_by(f64::total_cmp);
    Ok(vals)
}

/// Full eigendecomposition of a symmetric matrix, eigenvalues ascending.
pub fn sym_eigen_decomp(m: &DenseMatrix) -> Result<SymEigen> {
    m.check_symmetric(SYMMETRY_TOL)?;
    let n = m.rows();
    let mut a = m.clone();
    // vt holds V^T so that rotations touch contiguous rows
    let mut vt = DenseMatrix::identity(n);
    jacobi_sweeps(&mut a, Some(&mut vt))?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].total_cmp(&a[(j, j)]));
    let values = order.iter().map(|&i| a[(i, i)]).collect();
    let mut vectors = DenseMatrix::zeros(n, n);
    for (k, &i) in order.iter().enumerate() {
        for r in 0..n {
            vectors[(r, k)] = vt[(i, r)];
        }
    }
    Ok(SymEigen { values, vectors })
}

fn off_diagonal_sq(a: &DenseMatrix) -> f64 {
    let n = a.rows();
    let mut s = 0.0;
    for i in 0..n {
        for (j, v) in a.row(i).iter().enumerate() {
            if j != i {
                s += v * v;
            }
        }
    }
    s
}

/// Cyclic row-by-row Jacobi rotations until the off-diagonal part is negligible.
fn jacobi_sweeps(a: &mut DenseMatrix, mut vt: Option<&mut DenseMatrix>) -> Result<()> {
    let n = a.rows();
    let scale = a.frobenius_norm();
    if n < 2 || scale == 0.0 {
        return Ok(());
    }
    let target = (OFF_DIAGONAL_TOL * scale).powi(2);
    let mut row_p = vec![0.0; n];
    let mut row_q = vec![0.0; n];
    for _ in 0..MAX_SWEEPS {
        if off_diagonal_sq(a) <= target {
            return Ok(());
        }
        for p in 0..n - 1 {
            for q in p + 1..n {
                let apq = a[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let app = a[(p, p)];
                let aqq = a[(q, q)];
                // skip rotations that cannot change the diagonal in floating point
                if apq.abs() < f64::EPSILON * 1e-3 * (app.abs() + aqq.abs()) {
                    a[(p, q)] = 0.0;
                    a[(q, p)] = 0.0;
                    continue;
                }
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;

                row_p.copy_from_slice(a.row(p));
                row_q.copy_from_slice(a.row(q));
                {
                    let rp = a.row_mut(p);
                    for k in 0..n {
                        rp[k] = c * row_p[k] - s * row_q[k];
                    }
                }
                {
                    let rq = a.row_mut(q);
                    for k in 0..n {
                        rq[k] = s * row_p[k] + c * row_q[k];
                    }
                }
                a[(p, p)] = app - t * apq;
                a[(q, q)] = aqq + t * apq;
                a[(p, q)] = 0.0;
                a[(q, p)] = 0.0;
                for k in 0..n {
                    if k != p && k != q {
                        let vp = a[(p, k)];
                        let vq = a[(q, k)];
                        a[(k, p)] = vp;
                        a[(k, q)] = vq;
                    }
                }
                if let Some(v) = vt.as_deref_mut() {
                    row_p.copy_from_slice(v.row(p));
                    row_q.copy_from_slice(v.row(q));
                    let rp = v.row_mut(p);
                    for k in 0..n {
                        rp[k] = c * row_p[k] - s * row_q[k];
                    }
                    let rq = v.row_mut(q);
                    for k in 0..n {
                        rq[k] = s * row_p[k] + c * row_q[k];
                    }
                }
            }
        }
    }
    if off_diagonal_sq(a) <= target {
        Ok(())
    } else {
        Err(Error::NotConverged(format!(
            "Jacobi did not converge in {MAX_SWEEPS} sweeps"
        )))
    }
}

/// Largest eigenvalue of a symmetric operator known only through `apply`.
///
/// Lanczos with full reorthogonalization for at most `steps` iterations; exact
/// when `steps >= dim` (barring breakdown). `start` must be nonzero.
pub fn lanczos_max_eig(
    dim: usize,
    steps: usize,
    start: &[f64],
    mut apply: impl FnMut(&[f64], &mut [f64]),
) -> Result<f64> {
    let k_max = steps.min(dim).max(1);
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(k_max);
    let mut alphas = Vec::with_capacity(k_max);
    let mut betas: Vec<f64> = Vec::with_capacity(k_max);
    let s = norm(start);
    if s == 0.0 {
        return Err(Error::InvalidParameter("zero Lanczos start vector".into()));
    }
    let mut q: Vec<f64> = start.iter().map(|v| v / s).collect();
    let mut w = vec![0.0; dim];
    for _ in 0..k_max {
        apply(&q, &mut w);
        let alpha = dot(&q, &w);
        axpy(-alpha, &q, &mut w);
        if let (Some(prev), Some(&b)) = (basis.last(), betas.last()) {
            axpy(-b, prev, &mut w);
        }
        basis.push(q.clone());
        alphas.push(alpha);
        // twice is enough
        for _ in 0..2 {
            for v in &basis {
                let c = dot(v, &w);
                axpy(-c, v, &mut w);
            }
        }
        let beta = norm(&w);
        if basis.len() == k_max || beta <= 1e-14 * alpha.abs().max(1e-300) {
            break;
        }
        betas.push(beta);
        q = w.iter().map(|v| v / beta).collect();
    }
    let k = alphas.len();
    let mut t = DenseMatrix::zeros(k, k);
    for i in 0..k {
        t[(i, i)] = alphas[i];
        if i + 1 < k {
            t[(i, i + 1)] = betas[i];
            t[(i + 1, i)] = betas[i];
        }
    }
    let vals = sym_eigs(&t)?;
    Ok(*vals.last().expect("nonempty tridiagonal"))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_close(a: &[f64], b: &[f64], tol: f64) {
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(b) {
            assert!((x - y).abs() <= tol, "{a:?} vs {b:?}");
        }
    }

    #[test]
    fn diagonal_sorted() {
        let v = sym_eigs(&DenseMatrix::from_diag(&[3.0, 1.0, 2.0])).unwrap();
        assert_eq!(v, vec![1.0, 2.0, 3.0]);
    }

    #[test]
    fn two_by_two_char_poly() {
        // oracle: roots of l^2 - tr l + det
        let check = |m: DenseMatrix| {
            let tr = m.trace();
            let det = m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)];
            let d = (tr * tr - 4.0 * det).sqrt();
            let want = [(tr - d) / 2.0, (tr + d) / 2.0];
            assert_close(&sym_eigs(&m).unwrap(), &want, 1e-14);
        };
        check(DenseMatrix::from_rows(&[[0.75, 0.25], [0.25, 0.25]]));
        check(DenseMatrix::from_rows(&[[2.0, 1.0], [1.0, 1.0]]));

        let v = sym_eigs(&DenseMatrix::from_rows(&[[0.75, 0.25], [0.25, 0.25]])).unwrap();
        assert_close(&v, &[0.146447, 0.853553], 1e-6);
        let v = sym_eigs(&DenseMatrix::from_rows(&[[2.0, 1.0], [1.0, 1.0]])).unwrap();
        assert_close(&v, &[0.381966, 2.618034], 1e-6);
    }

    #[test]
    fn not_symmetric() {
        let m = DenseMatrix::from_rows(&[[1.0, 2.0], [0.0, 1.0]]);
        assert!(matches!(sym_eigs(&m), Err(Error::NotSymmetric(_))));
    }

    #[test]
    fn decomposition_reconstructs() {
        let b = DenseMatrix::from_rows(&[
            [1.0, 2.0, 0.0, -1.0],
            [0.5, -1.0, 3.0, 2.0],
            [2.0, 0.0, 1.0, 1.0],
            [0.0, 1.0, -2.0, 0.5],
        ]);
        let m = b.gram_cols();
        let e = sym_eigen_decomp(&m).unwrap();
        let v = &e.vectors;
        let lam = DenseMatrix::from_diag(&e.values);
        let rec = v.matmul(&lam).unwrap().matmul(&v.transpose()).unwrap();
        assert!(rec.max_abs_diff(&m) < 1e-12 * m.frobenius_norm());
        let vtv = v.transpose().matmul(v).unwrap();
        assert!(vtv.max_abs_diff(&DenseMatrix::identity(4)) < 1e-13);
        assert!((e.values.iter().sum::<f64>() - m.trace()).abs() < 1e-12 * m.trace());
    }

    #[test]
    fn lanczos_matches_jacobi() {
        let b = DenseMatrix::from_rows(&[
            [1.0, 2.0, 0.0, -1.0, 0.3],
            [0.5, -1.0, 3.0, 2.0, 0.0],
            [2.0, 0.0, 1.0, 1.0, -0.7],
            [0.0, 1.0, -2.0, 0.5, 1.1],
        ]);
        let m = b.gram_cols();
        let exact = *sym_eigs(&m).unwrap().last().unwrap();
        let est = lanczos_max_eig(5, 5, &[1.0, 0.3, -0.2, 0.7, 0.1], |v, out| m.mat_vec_into(v, out)).unwrap();
        assert!((exact - est).abs() < 1e-10 * exact);
    }
}
