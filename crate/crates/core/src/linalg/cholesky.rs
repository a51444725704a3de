use crate::error::{Error, Result};

use super::dense::DenseMatrix;

/// Lower-triangular Cholesky factor `L` with `L * L^T = M`.
#[derive(Clone, Debug)]
pub struct SpdFactor {
    dim: usize,
    // packed row-major lower triangle would save half, but p is small
    lower: DenseMatrix,
}

/// Relative asymmetry accepted on input.
pub const SYMMETRY_TOL: f64 = 1e-12;

/// Factors a symmetric positive-definite matrix.
///
/// A pivot at or below `dim * eps * ||M||_F` is treated as loss of definiteness.
pub fn cholesky_spd(m: &DenseMatrix) -> Result<SpdFactor> {
    m.check_symmetric(SYMMETRY_TOL)?;
    let n = m.rows();
    let floor = n as f64 * f64::EPSILON * m.frobenius_norm();
    let mut l = DenseMatrix::zeros(n, n);
    for j in 0..n {
        let lj = l.row(j);
        let d = m[(j, j)] - lj[..j].iter().map(|v| v * v).sum::<f64>();
        if !(d > floor) {
            return Err(Error::NotPositiveDefinite { index: j, pivot: d });
        }
        let djj = d.sqrt();
        l[(j, j)] = djj;
        for i in j + 1..n {
            let s: f64 = l.row(i)[..j].iter().zip(&l.row(j)[..j]).map(|(a, b)| a * b).sum();
            l[(i, j)] = (m[(i, j)] - s) / djj;
        }
    }
    Ok(SpdFactor { dim: n, lower: l })
}

impl SpdFactor {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn lower(&self) -> &DenseMatrix {
        &self.lower
    }

    /// Solves `M w = v`.
    pub fn solve(&self, v: &[f64]) -> Result<Vec<f64>> {
        if v.len() != self.dim {
            return Err(Error::DimensionMismatch(format!(
                "rhs of length {} for a factor of order {}",
                v.len(),
                self.dim
            )));
        }
        let mut w = v.to_vec();
        self.solve_in_place(&mut w);
        Ok(w)
    }

    /// Forward then backward substitution, overwriting `w`.
    pub fn solve_in_place(&self, w: &mut [f64]) {
        let n = self.dim;
        let l = &self.lower;
        for i in 0..n {
            let row = l.row(i);
            let s: f64 = row[..i].iter().zip(&w[..i]).map(|(a, b)| a * b).sum();
            w[i] = (w[i] - s) / row[i];
        }
        for i in (0..n).rev() {
            let mut s = w[i];
            for k in i + 1..n {
                s -= l[(k, i)] * w[k];
            }
            w[i] = s / l[(i, i)];
        }
    }

    /// `L L^T`, for checking the factorization.
    pub fn reconstruct(&self) -> DenseMatrix {
        self.lower.matmul(&self.lower.transpose()).expect("square factor")
    }
}

/// Free-function form of [`SpdFactor::solve`].
pub fn solve_spd(f: &SpdFactor, v: &[f64]) -> Result<Vec<f64>> {
    f.solve(v)
}
