use num_complex::Complex64;

use super::dense::DenseMatrix;

/// Outcome of eliminating `(B - shift I) z = r` over the complex numbers.
#[derive(Clone, Debug)]
pub enum ShiftedSolve {
    Solved(Vec<Complex64>),
    /// A pivot fell below the collapse threshold at this column.
    PivotCollapse {
        column: usize,
        pivot: f64,
    },
}

/// Gaussian elimination with partial pivoting on `B - shift I`.
///
/// `collapse` is an absolute pivot threshold; callers scale it to `||B||`.
pub fn solve_shifted(b: &DenseMatrix, shift: Complex64, rhs: &[Complex64], collapse: f64) -> ShiftedSolve {
    let n = b.rows();
    assert!(b.is_square() && rhs.len() == n);
    let mut m: Vec<Complex64> = b.as_slice().iter().map(|&v| Complex64::new(v, 0.0)).collect();
    for i in 0..n {
        m[i * n + i] -= shift;
    }
    let mut z = rhs.to_vec();
    for col in 0..n {
        let (piv_row, piv_mag) = (col..n)
            .map(|r| (r, m[r * n + col].norm()))
            .fold((col, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
        if piv_mag <= collapse {
            return ShiftedSolve::PivotCollapse {
                column: col,
                pivot: piv_mag,
            };
        }
        if piv_row != col {
            for k in 0..n {
                m.swap(col * n + k, piv_row * n + k);
            }
            z.swap(col, piv_row);
        }
        let piv = m[col * n + col];
        for r in col + 1..n {
            let f = m[r * n + col] / piv;
            if f == Complex64::new(0.0, 0.0) {
                continue;
            }
            for k in col..n {
                let v = m[col * n + k];
                m[r * n + k] -= f * v;
            }
            let zc = z[col];
            z[r] -= f * zc;
        }
    }
    for i in (0..n).rev() {
        let mut s = z[i];
        for k in i + 1..n {
            s -= m[i * n + k] * z[k];
        }
        z[i] = s / m[i * n + i];
    }
    ShiftedSolve::Solved(z)
}
