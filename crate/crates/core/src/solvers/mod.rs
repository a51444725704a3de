//! Iterative engines for APC and the competing distributed solvers.
//!
//! Every method is a pair of worker and master update rules driven by one
//! round loop, so the sequential engines and the simulated network share code.

mod engine;
mod kernels;
mod precond;
mod trace;

pub(crate) use engine::{drive, initial_estimate, working_blocks};
pub use engine::{
    run, run_admm, run_apc, run_cimmino, run_dgd, run_dhbm, run_dnag, run_precond_dhbm, Budget, RunOptions,
    DEFAULT_TOL, DIVERGENCE_FACTOR,
};
pub use kernels::{
    average, init_worker, master_round, master_step_apc, ordered_sum, worker_round, worker_step_apc, Kernel,
    MasterState, WorkerState,
};
pub use precond::{build_preconditioned, PrecondSystem};
pub use trace::{ErrorKind, IterationTrace, TraceRecord};
