//! Seeded synthetic systems.
//!
//! Generator: xoshiro256++ seeded through SplitMix64 (`seed_from_u64`).
//! Normals: Box–Muller on 53-bit uniforms, both outputs of each pair used in
//! order (cosine branch first). `A` is filled row-major, then `x*`.

use rand_core::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;

use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;

/// Box–Muller normal stream over xoshiro256++.
pub struct GaussianStream {
    rng: Xoshiro256PlusPlus,
    spare: Option<f64>,
}

impl GaussianStream {
    pub fn new(seed: u64) -> Self {
        GaussianStream {
            rng: Xoshiro256PlusPlus::seed_from_u64(seed),
            spare: None,
        }
    }

    /// Uniform on `[0, 1)` with 53 random bits.
    pub fn uniform(&mut self) -> f64 {
        (self.rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    pub fn standard_normal(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        // u1 in (0, 1] keeps the log finite
        let u1 = 1.0 - self.uniform();
        let u2 = self.uniform();
        let r = (-2.0 * u1.ln()).sqrt();
        let theta = 2.0 * std::f64::consts::PI * u2;
        self.spare = Some(r * theta.sin());
        r * theta.cos()
    }
}

/// A synthetic consistent system `A x* = b`.
#[derive(Clone, Debug)]
pub struct SyntheticSystem {
    pub a: DenseMatrix,
    pub b: Vec<f64>,
    pub x_star: Vec<f64>,
}

/// `A` with i.i.d. N(mean, 1) entries (`rows x n`), `x*` standard normal, `b = A x*`.
pub fn synth_gaussian(n: usize, rows: usize, mean: f64, seed: u64) -> Result<SyntheticSystem> {
    if n == 0 || rows < n {
        return Err(Error::InvalidDimensions(format!(
            "need N >= n >= 1, got N={rows}, n={n}"
        )));
    }
    if !mean.is_finite() {
        return Err(Error::InvalidParameter("mean must be finite".into()));
    }
    let mut g = GaussianStream::new(seed);
    let data: Vec<f64> = (0..rows * n).map(|_| mean + g.standard_normal()).collect();
    let a = DenseMatrix::from_vec(rows, n, data)?;
    let x_star: Vec<f64> = (0..n).map(|_| g.standard_normal()).collect();
    let b = a.mat_vec(&x_star)?;
    Ok(SyntheticSystem { a, b, x_star })
}

/// Seeded standard-normal vector, used when a right-hand side must be synthesized.
pub fn synth_solution(n: usize, seed: u64) -> Vec<f64> {
    let mut g = GaussianStream::new(seed);
    (0..n).map(|_| g.standard_normal()).collect()
}

/// Seeded Fisher–Yates permutation of `0..len`.
pub fn row_permutation(len: usize, seed: u64) -> Vec<usize> {
    let mut g = GaussianStream::new(seed);
    let mut perm: Vec<usize> = (0..len).collect();
    for i in (1..len).rev() {
        let j = (g.next_u64() % (i as u64 + 1)) as usize;
        perm.swap(i, j);
    }
    perm
}
