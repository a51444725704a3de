use super::dense::{axpy, dot, DenseMatrix};

/// Orthonormal basis of the row space of a full-row-rank `p x n` block `A`,
/// from a Householder factorization `A^T = Q R`.
#[derive(Clone, Debug)]
pub struct RowBasis {
    /// Row `k` is column `k` of `Q`.
    q: DenseMatrix,
    /// Upper-triangular `R`, `p x p`.
    r: DenseMatrix,
}

impl RowBasis {
    pub fn new(a: &DenseMatrix) -> Self {
        let (p, n) = (a.rows(), a.cols());
        assert!(p <= n, "row basis needs a wide block, got {p}x{n}");
        // working columns of A^T are the rows of A
        let mut w = a.clone();
        // H_k = I - tau_k v_k v_k^T with v_k[0] = 1
        let mut reflectors: Vec<(f64, Vec<f64>)> = Vec::with_capacity(p);
        let mut r = DenseMatrix::zeros(p, p);
        for k in 0..p {
            let col = &w.row(k)[k..];
            let alpha = col.iter().map(|v| v * v).sum::<f64>().sqrt();
            let diag = if col[0] >= 0.0 { -alpha } else { alpha };
            let head = col[0] - diag;
            let (tau, v) = if head == 0.0 {
                (0.0, vec![0.0; col.len()])
            } else {
                let mut v: Vec<f64> = col.iter().map(|x| x / head).collect();
                v[0] = 1.0;
                (head / -diag, v)
            };
            r[(k, k)] = diag;
            for j in k + 1..p {
                let cj = &mut w.row_mut(j)[k..];
                let c = tau * dot(&v, cj);
                axpy(-c, &v, cj);
                r[(k, j)] = cj[0];
            }
            reflectors.push((tau, v));
        }
        // Q e_k = H_0 ... H_{p-1} e_k
        let mut q = DenseMatrix::zeros(p, n);
        for k in 0..p {
            let e = q.row_mut(k);
            e[k] = 1.0;
            for (j, (tau, v)) in reflectors.iter().enumerate().rev() {
                let c = tau * dot(v, &e[j..]);
                axpy(-c, v, &mut e[j..]);
            }
        }
        RowBasis { q, r }
    }

    pub fn rank(&self) -> usize {
        self.q.rows()
    }

    /// `Q Q^T v`, the projection onto the row space.
    pub fn project_onto(&self, v: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; v.len()];
        for k in 0..self.rank() {
            let qk = self.q.row(k);
            axpy(dot(qk, v), qk, &mut out);
        }
        out
    }

    /// `A^+ r = Q R^{-T} r`, consuming `r`.
    pub fn pinv_apply(&self, mut r: Vec<f64>) -> Vec<f64> {
        let p = self.rank();
        for i in 0..p {
            let s: f64 = (0..i).map(|k| self.r[(k, i)] * r[k]).sum();
            r[i] = (r[i] - s) / self.r[(i, i)];
        }
        let mut out = vec![0.0; self.q.cols()];
        for (k, rk) in r.iter().enumerate() {
            axpy(*rk, self.q.row(k), &mut out);
        }
        out
    }

    /// Adds `s Q Q^T` into `acc`.
    pub fn accumulate_projector(&self, s: f64, acc: &mut DenseMatrix) {
        for k in 0..self.rank() {
            let qk = self.q.row(k);
            for (i, &qi) in qk.iter().enumerate() {
                if qi != 0.0 {
                    axpy(s * qi, qk, acc.row_mut(i));
                }
            }
        }
    }
}
