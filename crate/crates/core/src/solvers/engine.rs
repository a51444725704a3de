use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::{Block, PartitionedSystem};
use crate::linalg::{dist, norm, sym_eigs, DenseMatrix};
use crate::report::fit_rate;
use crate::spectral::{convergence_time, dhbm_params, Method, MethodParams};

use super::kernels::{average, init_worker, master_round, worker_round, Kernel, MasterState, WorkerState};
use super::precond::build_preconditioned;
use super::trace::{ErrorKind, IterationTrace, TraceRecord};

/// A run stops with `Error::Diverged` once its error exceeds this multiple of
/// the initial error.
pub const DIVERGENCE_FACTOR: f64 = 1e12;
/// Floor on the initial error used by the divergence guard.
const DIVERGENCE_FLOOR: f64 = 1e-15;
pub const DEFAULT_TOL: f64 = 1e-10;
const FALLBACK_ITERS: usize = 10_000;

/// Stopping rule.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Budget {
    pub max_iters: usize,
    pub tol: f64,
}

impl Budget {
    pub fn new(max_iters: usize, tol: f64) -> Self {
        Budget { max_iters, tol }
    }

    /// `tol = 1e-10`, `max_iters = max(ceil(100 T), 100)`.
    pub fn for_time(t_predicted: f64) -> Self {
        let max_iters = if t_predicted.is_finite() {
            ((100.0 * t_predicted).ceil() as usize).max(100)
        } else {
            FALLBACK_ITERS
        };
        Budget {
            max_iters,
            tol: DEFAULT_TOL,
        }
    }
}

/// Run-time switches shared by every engine.
#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    /// Start the master at zero instead of the average of the block solutions.
    pub zero_init: bool,
    /// Explicit master start; overrides `zero_init`.
    pub x0: Option<Vec<f64>>,
    /// Keep the master estimate of every round.
    pub record_iterates: bool,
    /// Run ADMM with its dual variables instead of pinning them at zero.
    pub admm_dual: bool,
}

/// Error and residual of a master estimate against the original system.
pub(crate) struct Meter<'a> {
    a: &'a DenseMatrix,
    b: &'a [f64],
    b_norm: f64,
    x_star: Option<(&'a [f64], f64)>,
}

fn scale_or_one(v: f64) -> f64 {
    if v > 0.0 {
        v
    } else {
        1.0
    }
}

impl<'a> Meter<'a> {
    pub(crate) fn new(sys: &'a PartitionedSystem) -> Self {
        Meter {
            a: sys.a(),
            b: sys.b(),
            b_norm: scale_or_one(norm(sys.b())),
            x_star: sys.x_star().map(|x| (x, scale_or_one(norm(x)))),
        }
    }

    fn kind(&self) -> ErrorKind {
        if self.x_star.is_some() {
            ErrorKind::Solution
        } else {
            ErrorKind::Residual
        }
    }

    fn record(&self, iter: usize, x: &[f64]) -> TraceRecord {
        let mut ax = vec![0.0; self.a.rows()];
        self.a.mat_vec_into(x, &mut ax);
        let residual = dist(&ax, self.b) / self.b_norm;
        let error = match self.x_star {
            Some((xs, s)) => dist(x, xs) / s,
            None => residual,
        };
        TraceRecord { iter, error, residual }
    }
}

/// Master `x_bar(0)` from the workers' initial block solutions.
pub(crate) fn initial_estimate(opts: &RunOptions, block_solutions: &[Vec<f64>], n: usize) -> Result<Vec<f64>> {
    if let Some(x0) = &opts.x0 {
        if x0.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "start vector has {} entries for {n} unknowns",
                x0.len()
            )));
        }
        return Ok(x0.clone());
    }
    if opts.zero_init {
        return Ok(vec![0.0; n]);
    }
    Ok(average(block_solutions, n))
}

/// The round loop shared by the sequential engine and the simulated network.
/// `round` maps the master's broadcast to the `m` responses in block order.
pub(crate) fn drive(
    sys: &PartitionedSystem,
    params: MethodParams,
    kernel: &Kernel,
    budget: &Budget,
    opts: &RunOptions,
    x0: Vec<f64>,
    mut round: impl FnMut(usize, &[f64]) -> Result<Vec<Vec<f64>>>,
) -> Result<IterationTrace> {
    let meter = Meter::new(sys);
    let mut ms = MasterState::new(kernel, x0);
    let initial = meter.record(0, &ms.x_bar);
    let limit = DIVERGENCE_FACTOR * initial.error.max(DIVERGENCE_FLOOR);
    let mut trace = IterationTrace {
        method: params.method,
        params,
        error_kind: meter.kind(),
        initial,
        records: Vec::new(),
        converged: initial.error <= budget.tol,
        fitted_rate: None,
        t_empirical: None,
        x: Vec::new(),
        iterates: opts.record_iterates.then(|| vec![ms.x_bar.clone()]),
    };
    if !initial.error.is_finite() {
        return Err(Error::NonFinite("initial estimate"));
    }
    while !trace.converged && trace.records.len() < budget.max_iters {
        let responses = round(ms.t, &ms.x_bar)?;
        master_round(kernel, &mut ms, &responses);
        let rec = meter.record(ms.t, &ms.x_bar);
        trace.records.push(rec);
        if let Some(it) = trace.iterates.as_mut() {
            it.push(ms.x_bar.clone());
        }
        if !rec.error.is_finite() || rec.error > limit {
            trace.x = ms.x_bar;
            return Err(Error::Diverged {
                method: params.method.to_string(),
                iteration: rec.iter,
                trace: Box::new(trace),
            });
        }
        trace.converged = rec.error <= budget.tol;
    }
    trace.x = ms.x_bar;
    if let Ok(r) = fit_rate(&trace) {
        trace.fitted_rate = Some(r);
        trace.t_empirical = Some(convergence_time(r));
    }
    Ok(trace)
}

/// Runs `kernel` sequentially over `blocks`, measuring against `sys`.
fn execute(
    sys: &PartitionedSystem,
    blocks: &[Block],
    params: MethodParams,
    budget: &Budget,
    opts: &RunOptions,
) -> Result<IterationTrace> {
    let kernel = Kernel::from_params(&params, opts.admm_dual)?;
    let mut workers = blocks
        .iter()
        .enumerate()
        .map(|(i, b)| {
            let mut w = init_worker(i, &b.a, &b.b)?;
            w.prepare(&kernel)?;
            Ok(w)
        })
        .collect::<Result<Vec<WorkerState>>>()?;
    let sols: Vec<Vec<f64>> = workers.iter().map(|w| w.x.clone()).collect();
    let x0 = initial_estimate(opts, &sols, sys.n())?;
    drive(sys, params, &kernel, budget, opts, x0, |_, bcast| {
        Ok(workers.iter_mut().map(|w| worker_round(&kernel, w, bcast)).collect())
    })
}

/// The blocks a method actually iterates on: the originals, or their whitened
/// form for preconditioned heavy-ball.
pub(crate) fn working_blocks(sys: &PartitionedSystem, method: Method) -> Result<Vec<Block>> {
    if method == Method::Pdhbm {
        Ok(build_preconditioned(sys)?.blocks().to_vec())
    } else {
        Ok(sys.blocks().to_vec())
    }
}

/// Runs any method with explicit parameters.
pub fn run(
    sys: &PartitionedSystem,
    params: &MethodParams,
    budget: &Budget,
    opts: &RunOptions,
) -> Result<IterationTrace> {
    if params.method == Method::Pdhbm {
        let pc = build_preconditioned(sys)?;
        return execute(sys, pc.blocks(), *params, budget, opts);
    }
    execute(sys, sys.blocks(), *params, budget, opts)
}

fn run_checked(
    sys: &PartitionedSystem,
    params: &MethodParams,
    budget: &Budget,
    expect: &[Method],
) -> Result<IterationTrace> {
    if !expect.contains(&params.method) {
        return Err(Error::InvalidParameter(format!(
            "expected parameters for {}, got {}",
            expect[0], params.method
        )));
    }
    run(sys, params, budget, &RunOptions::default())
}

pub fn run_apc(sys: &PartitionedSystem, params: &MethodParams, budget: &Budget) -> Result<IterationTrace> {
    run_checked(sys, params, budget, &[Method::Apc, Method::Consensus])
}

pub fn run_dgd(sys: &PartitionedSystem, params: &MethodParams, budget: &Budget) -> Result<IterationTrace> {
    run_checked(sys, params, budget, &[Method::Dgd])
}

pub fn run_dnag(sys: &PartitionedSystem, params: &MethodParams, budget: &Budget) -> Result<IterationTrace> {
    run_checked(sys, params, budget, &[Method::Dnag])
}

pub fn run_dhbm(sys: &PartitionedSystem, params: &MethodParams, budget: &Budget) -> Result<IterationTrace> {
    run_checked(sys, params, budget, &[Method::Dhbm])
}

pub fn run_admm(sys: &PartitionedSystem, params: &MethodParams, budget: &Budget) -> Result<IterationTrace> {
    run_checked(sys, params, budget, &[Method::Admm])
}

pub fn run_cimmino(sys: &PartitionedSystem, params: &MethodParams, budget: &Budget) -> Result<IterationTrace> {
    run_checked(sys, params, budget, &[Method::Cimmino])
}

/// Heavy-ball on the whitened system, tuned from the spectrum of `C^T C`.
pub fn run_precond_dhbm(sys: &PartitionedSystem, budget: &Budget) -> Result<IterationTrace> {
    let pc = build_preconditioned(sys)?;
    let mut params = dhbm_params(&sym_eigs(&pc.gram())?)?;
    params.method = Method::Pdhbm;
    execute(sys, pc.blocks(), params, budget, &RunOptions::default())
}
