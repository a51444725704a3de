//! Loading, synthesizing and row-partitioning linear systems.

pub mod mtx;
pub mod partition;
pub mod synth;

pub use mtx::{parse_matrix_market, read_matrix_market, read_vector, write_matrix_market, write_vector, MtxLayout};
pub use partition::{partition_rows, Block, PartitionedSystem};
pub use synth::{row_permutation, synth_gaussian, synth_solution, GaussianStream, SyntheticSystem};
