use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{dist, norm, sym_eigs, DenseMatrix};

/// Relative floor on `lambda_min(A_i A_i^T)` below which a block counts as rank deficient.
pub const RANK_TOL: f64 = 1e-10;
/// Accepted relative residual of a planted solution.
pub const SOLUTION_TOL: f64 = 1e-8;

/// One worker's share `[A_i, b_i]`.
#[derive(Clone, Debug, Serialize)]
pub struct Block {
    pub a: DenseMatrix,
    pub b: Vec<f64>,
}

/// A consistent system split row-wise into `m` equal contiguous blocks.
#[derive(Clone, Debug)]
pub struct PartitionedSystem {
    a: DenseMatrix,
    b: Vec<f64>,
    m: usize,
    p: usize,
    blocks: Vec<Block>,
    x_star: Option<Vec<f64>>,
}

impl PartitionedSystem {
    pub fn a(&self) -> &DenseMatrix {
        &self.a
    }
    pub fn b(&self) -> &[f64] {
        &self.b
    }
    /// Worker count.
    pub fn m(&self) -> usize {
        self.m
    }
    /// Rows per worker.
    pub fn p(&self) -> usize {
        self.p
    }
    /// Unknowns.
    pub fn n(&self) -> usize {
        self.a.cols()
    }
    /// Equations.
    pub fn rows(&self) -> usize {
        self.a.rows()
    }
    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }
    pub fn x_star(&self) -> Option<&[f64]> {
        self.x_star.as_deref()
    }
}

/// Splits `(A, b)` into `m` contiguous blocks of `N / m` rows and validates
/// that every block has full row rank.
pub fn partition_rows(a: &DenseMatrix, b: &[f64], m: usize, x_star: Option<Vec<f64>>) -> Result<PartitionedSystem> {
    let rows = a.rows();
    let n = a.cols();
    if b.len() != rows {
        return Err(Error::DimensionMismatch(format!(
            "rhs has {} entries for {rows} equations",
            b.len()
        )));
    }
    if b.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("rhs"));
    }
    if m == 0 || !rows.is_multiple_of(m) {
        return Err(Error::IndivisibleRows { rows, m });
    }
    if let Some(x) = &x_star {
        if x.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "solution has {} entries for {n} unknowns",
                x.len()
            )));
        }
        let ax = a.mat_vec(x)?;
        let rel = dist(&ax, b) / norm(b).max(f64::MIN_POSITIVE);
        if rel > SOLUTION_TOL {
            return Err(Error::InconsistentSolution(rel));
        }
    }
    let p = rows / m;
    let blocks: Vec<Block> = (0..m)
        .map(|i| Block {
            a: a.row_block(i * p, (i + 1) * p),
            b: b[i * p..(i + 1) * p].to_vec(),
        })
        .collect();
    validate_blocks(&blocks)?;
    Ok(PartitionedSystem {
        a: a.clone(),
        b: b.to_vec(),
        m,
        p,
        blocks,
        x_star,
    })
}

fn block_has_full_row_rank(block: &Block) -> Result<bool> {
    let (p, n) = (block.a.rows(), block.a.cols());
    if p > n {
        return Ok(false);
    }
    let g = block.a.gram_rows();
    let eig = sym_eigs(&g)?;
    let top = eig[p - 1];
    Ok(top > 0.0 && eig[0] > RANK_TOL * top)
}

/// Checks blocks in parallel; reports the lowest failing index.
fn validate_blocks(blocks: &[Block]) -> Result<()> {
    let threads = std::thread::available_parallelism().map_or(1, |n| n.get());
    let verdicts: Vec<Result<bool>> = if threads <= 1 || blocks.len() <= 1 {
        blocks.iter().map(block_has_full_row_rank).collect()
    } else {
        let chunk = blocks.len().div_ceil(threads);
        std::thread::scope(|s| {
            let handles: Vec<_> = blocks
                .chunks(chunk)
                .map(|c| s.spawn(move || c.iter().map(block_has_full_row_rank).collect::<Vec<_>>()))
                .collect();
            handles
                .into_iter()
                .flat_map(|h| h.join().expect("rank check panicked"))
                .collect()
        })
    };
    for (i, v) in verdicts.into_iter().enumerate() {
        if !v? {
            return Err(Error::RankDeficientBlock { block: i });
        }
    }
    Ok(())
}
