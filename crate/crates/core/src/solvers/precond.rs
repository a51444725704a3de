use crate::error::{Error, Result};
use crate::ingest::{Block, PartitionedSystem};
use crate::linalg::{sym_eigen_decomp, DenseMatrix};

/// Block-whitened system `C x = d` with `C_i = (A_i A_i^T)^{-1/2} A_i`.
#[derive(Clone, Debug)]
pub struct PrecondSystem {
    c: DenseMatrix,
    d: Vec<f64>,
    blocks: Vec<Block>,
    transforms: Vec<DenseMatrix>,
}

impl PrecondSystem {
    pub fn c(&self) -> &DenseMatrix {
        &self.c
    }
    pub fn d(&self) -> &[f64] {
        &self.d
    }
    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }
    /// The per-block `(A_i A_i^T)^{-1/2}`.
    pub fn transforms(&self) -> &[DenseMatrix] {
        &self.transforms
    }
    /// `C^T C`.
    pub fn gram(&self) -> DenseMatrix {
        self.c.gram_cols()
    }
}

/// Symmetric inverse square root through the eigendecomposition of each `A_i A_i^T`.
pub fn build_preconditioned(sys: &PartitionedSystem) -> Result<PrecondSystem> {
    let mut blocks = Vec::with_capacity(sys.m());
    let mut transforms = Vec::with_capacity(sys.m());
    for (i, blk) in sys.blocks().iter().enumerate() {
        let eig = sym_eigen_decomp(&blk.a.gram_rows())?;
        let p = eig.values.len();
        if !(eig.values[0] > 0.0) {
            return Err(Error::RankDeficientBlock { block: i });
        }
        let mut scaled = eig.vectors.clone();
        for r in 0..p {
            for k in 0..p {
                scaled[(r, k)] /= eig.values[k].sqrt();
            }
        }
        let mut s = scaled.matmul(&eig.vectors.transpose())?;
        for r in 0..p {
            for k in 0..r {
                let v = 0.5 * (s[(r, k)] + s[(k, r)]);
                s[(r, k)] = v;
                s[(k, r)] = v;
            }
        }
        blocks.push(Block {
            a: s.matmul(&blk.a)?,
            b: s.mat_vec(&blk.b)?,
        });
        transforms.push(s);
    }
    let parts: Vec<&DenseMatrix> = blocks.iter().map(|b| &b.a).collect();
    let c = DenseMatrix::vstack(&parts)?;
    let d = blocks.iter().flat_map(|b| b.b.iter().copied()).collect();
    Ok(PrecondSystem {
        c,
        d,
        blocks,
        transforms,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::partition_rows;
    use crate::spectral::compute_x;

    #[test]
    fn orthonormal_rows_unchanged() {
        let a = DenseMatrix::from_rows(&[[0.6, 0.8, 0.0], [0.0, 0.0, 1.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]]);
        let sys = partition_rows(&a, &[1.0, 2.0, 3.0, 4.0], 2, None).unwrap();
        let pc = build_preconditioned(&sys).unwrap();
        assert!(pc.c().max_abs_diff(&a) < 1e-15);
    }

    #[test]
    fn e1_gram_is_twice_x() {
        let a = DenseMatrix::from_rows(&[[1.0, 0.0], [1.0, 1.0]]);
        let sys = partition_rows(&a, &[1.0, 2.0], 2, None).unwrap();
        let pc = build_preconditioned(&sys).unwrap();
        let want = DenseMatrix::from_rows(&[[1.5, 0.5], [0.5, 0.5]]);
        assert!(pc.gram().max_abs_diff(&want) < 1e-15);
        let s = compute_x(&sys).unwrap();
        let mut mx = s.x.clone();
        mx.scale(2.0);
        assert!(pc.gram().max_abs_diff(&mx) < 1e-15);
        // C_2 = [1, 1] / sqrt 2, d_2 = 2 / sqrt 2
        assert!((pc.c()[(1, 0)] - 0.5f64.sqrt()).abs() < 1e-15);
        assert!((pc.d()[1] - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn blocks_are_whitened() {
        let a = DenseMatrix::from_rows(&[
            [2.0, 1.0, 0.0, 1.0],
            [1.0, 3.0, 1.0, 0.0],
            [0.0, 1.0, 1.0, 4.0],
            [1.0, 1.0, 1.0, 1.0],
        ]);
        let sys = partition_rows(&a, &[1.0; 4], 2, None).unwrap();
        let pc = build_preconditioned(&sys).unwrap();
        for b in pc.blocks() {
            assert!(b.a.gram_rows().max_abs_diff(&DenseMatrix::identity(2)) < 1e-12);
        }
    }
}
