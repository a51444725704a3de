//! Verification of the block iteration matrix, empirical rate fitting and
//! method comparison tables.

mod blockmatrix;
mod compare;
mod fit;

pub use blockmatrix::{
    assemble_block_matrix, predicted_spectrum, verify_spectrum, BlockIterationMatrix, EigenCheck, SpectrumVerification,
    MAX_ORDER, SINGULAR_NORM,
};
pub use compare::{build_comparison, ComparisonRow, ComparisonTable, RunMode};
pub use fit::{fit_rate, fit_tail, MIN_RECORDS, TRANSIENT};
