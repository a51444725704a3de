//! Dense real kernels: storage, Cholesky, Householder QR, symmetric eigensolvers, quadratic roots.

pub mod cholesky;
pub mod complex_solve;
pub mod dense;
pub mod eigen;
pub mod qr;
pub mod quadratic;

pub use cholesky::{cholesky_spd, solve_spd, SpdFactor};
pub use complex_solve::{solve_shifted, ShiftedSolve};
pub use dense::{axpy, dist, dot, norm, sub, DenseMatrix};
pub use eigen::{lanczos_max_eig, sym_eigen_decomp, sym_eigs, SymEigen};
pub use qr::RowBasis;
pub use quadratic::{quadratic_roots, ComplexPair};
