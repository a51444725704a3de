//! C interface to the distributed solvers.
//!
//! Every function returns an [`ApcStatus`]. On failure the message is kept in
//! thread-local storage and read back with [`apc_last_error`]. Handles are
//! opaque and must be released with their `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use apc_core::error::ExitClass;
use apc_core::ingest::{partition_rows, synth_gaussian, PartitionedSystem};
use apc_core::linalg::DenseMatrix;
use apc_core::simnet::run_simulated;
use apc_core::solvers::{run, Budget, IterationTrace, RunOptions, DEFAULT_TOL};
use apc_core::spectral::{compute_x, optimal_params, predicted_params, Method, MethodParams, Tuning};
use apc_core::Error;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ApcStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    /// Bad input data: dimensions, rank, inconsistency, I/O.
    DataError = 3,
    /// Tuning or spectral failure.
    NumericalError = 4,
    /// The run diverged; the partial trace is still returned.
    Diverged = 5,
    Panic = 6,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ApcMethod {
    Apc = 0,
    Dgd = 1,
    Dnag = 2,
    Dhbm = 3,
    Admm = 4,
    Cimmino = 5,
    Pdhbm = 6,
    Consensus = 7,
}

impl From<ApcMethod> for Method {
    fn from(m: ApcMethod) -> Self {
        match m {
            ApcMethod::Apc => Method::Apc,
            ApcMethod::Dgd => Method::Dgd,
            ApcMethod::Dnag => Method::Dnag,
            ApcMethod::Dhbm => Method::Dhbm,
            ApcMethod::Admm => Method::Admm,
            ApcMethod::Cimmino => Method::Cimmino,
            ApcMethod::Pdhbm => Method::Pdhbm,
            ApcMethod::Consensus => Method::Consensus,
        }
    }
}

impl From<Method> for ApcMethod {
    fn from(m: Method) -> Self {
        match m {
            Method::Apc => ApcMethod::Apc,
            Method::Dgd => ApcMethod::Dgd,
            Method::Dnag => ApcMethod::Dnag,
            Method::Dhbm => ApcMethod::Dhbm,
            Method::Admm => ApcMethod::Admm,
            Method::Cimmino => ApcMethod::Cimmino,
            Method::Pdhbm => ApcMethod::Pdhbm,
            Method::Consensus => ApcMethod::Consensus,
        }
    }
}

/// Method parameters. Fields a method does not use are NaN.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ApcParams {
    pub method: ApcMethod,
    pub gamma: f64,
    pub eta: f64,
    pub alpha: f64,
    pub beta: f64,
    pub xi: f64,
    pub nu: f64,
    /// Predicted contraction factor; output only.
    pub rho: f64,
    /// Predicted convergence time; output only.
    pub t_predicted: f64,
}

impl From<MethodParams> for ApcParams {
    fn from(p: MethodParams) -> Self {
        let mut out = ApcParams {
            method: p.method.into(),
            gamma: f64::NAN,
            eta: f64::NAN,
            alpha: f64::NAN,
            beta: f64::NAN,
            xi: f64::NAN,
            nu: f64::NAN,
            rho: p.rho,
            t_predicted: p.t_predicted,
        };
        match p.tuning {
            Tuning::Apc { gamma, eta } => {
                out.gamma = gamma;
                out.eta = eta;
            }
            Tuning::Dgd { alpha } => out.alpha = alpha,
            Tuning::Momentum { alpha, beta } => {
                out.alpha = alpha;
                out.beta = beta;
            }
            Tuning::Admm { xi } => out.xi = xi,
            Tuning::Cimmino { nu } => out.nu = nu,
        }
        out
    }
}

impl ApcParams {
    fn tuning(&self) -> Tuning {
        match self.method {
            ApcMethod::Apc | ApcMethod::Consensus => Tuning::Apc {
                gamma: self.gamma,
                eta: self.eta,
            },
            ApcMethod::Dgd => Tuning::Dgd { alpha: self.alpha },
            ApcMethod::Dnag | ApcMethod::Dhbm | ApcMethod::Pdhbm => Tuning::Momentum {
                alpha: self.alpha,
                beta: self.beta,
            },
            ApcMethod::Admm => Tuning::Admm { xi: self.xi },
            ApcMethod::Cimmino => Tuning::Cimmino { nu: self.nu },
        }
    }
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ApcTraceSummary {
    /// Completed rounds.
    pub rounds: usize,
    pub converged: bool,
    pub final_error: f64,
    /// NaN when the trace is too short to fit.
    pub fitted_rate: f64,
    pub t_empirical: f64,
    pub t_predicted: f64,
}

/// A row-partitioned system.
pub struct ApcSystem {
    inner: PartitionedSystem,
}

/// Result of one solver run.
pub struct ApcTrace {
    inner: IterationTrace,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior nul removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn clear_last_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

fn status_of(e: &Error) -> ApcStatus {
    match e {
        Error::Diverged { .. } => ApcStatus::Diverged,
        _ => match e.exit_class() {
            ExitClass::Usage => ApcStatus::InvalidArgument,
            ExitClass::Data => ApcStatus::DataError,
            ExitClass::Numerical => ApcStatus::NumericalError,
        },
    }
}

fn fail(status: ApcStatus, msg: impl Into<String>) -> ApcStatus {
    set_last_error(msg.into());
    status
}

fn guard(f: impl FnOnce() -> ApcStatus) -> ApcStatus {
    clear_last_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            fail(ApcStatus::Panic, format!("internal panic: {msg}"))
        }
    }
}

fn report(e: Error) -> ApcStatus {
    let s = status_of(&e);
    set_last_error(e.to_string());
    s
}

unsafe fn slice<'a>(p: *const f64, len: usize) -> Option<&'a [f64]> {
    if len == 0 {
        return Some(&[]);
    }
    if p.is_null() {
        None
    } else {
        Some(std::slice::from_raw_parts(p, len))
    }
}

/// Message of the last failure on this thread, or NULL. Valid until the next
/// call into this library from the same thread.
#[no_mangle]
pub extern "C" fn apc_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn apc_version() -> *const c_char {
    static VERSION: &CStr = match CStr::from_bytes_with_nul(concat!(env!("CARGO_PKG_VERSION"), "\0").as_bytes()) {
        Ok(c) => c,
        Err(_) => panic!("version string"),
    };
    VERSION.as_ptr()
}

/// Builds a system from a row-major `rows x cols` matrix, its right-hand side
/// and an optional known solution (`x_star` may be NULL), split into `m`
/// equal blocks.
///
/// # Safety
/// `a` must point to `rows * cols` values, `b` to `rows` values and `x_star`,
/// when not NULL, to `cols` values. `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn apc_system_new(
    rows: usize,
    cols: usize,
    a: *const f64,
    b: *const f64,
    x_star: *const f64,
    m: usize,
    out: *mut *mut ApcSystem,
) -> ApcStatus {
    guard(|| {
        if out.is_null() {
            return fail(ApcStatus::NullPointer, "out is NULL");
        }
        *out = ptr::null_mut();
        let Some(len) = rows.checked_mul(cols) else {
            return fail(ApcStatus::InvalidArgument, "rows * cols overflows");
        };
        let (Some(a), Some(b)) = (slice(a, len), slice(b, rows)) else {
            return fail(ApcStatus::NullPointer, "a or b is NULL");
        };
        let x_star = if x_star.is_null() {
            None
        } else {
            Some(slice(x_star, cols).expect("checked non-null").to_vec())
        };
        let built = DenseMatrix::from_vec(rows, cols, a.to_vec()).and_then(|a| partition_rows(&a, b, m, x_star));
        match built {
            Ok(inner) => {
                *out = Box::into_raw(Box::new(ApcSystem { inner }));
                ApcStatus::Ok
            }
            Err(e) => report(e),
        }
    })
}

/// Builds the seeded Gaussian system `n` unknowns by `rows` equations with
/// entries of the given mean, split into `m` blocks.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn apc_system_synth(
    n: usize,
    rows: usize,
    mean: f64,
    seed: u64,
    m: usize,
    out: *mut *mut ApcSystem,
) -> ApcStatus {
    guard(|| {
        if out.is_null() {
            return fail(ApcStatus::NullPointer, "out is NULL");
        }
        *out = ptr::null_mut();
        let built = synth_gaussian(n, rows, mean, seed).and_then(|s| partition_rows(&s.a, &s.b, m, Some(s.x_star)));
        match built {
            Ok(inner) => {
                *out = Box::into_raw(Box::new(ApcSystem { inner }));
                ApcStatus::Ok
            }
            Err(e) => report(e),
        }
    })
}

/// # Safety
/// `sys` must come from this library and not be used afterwards. NULL is a no-op.
#[no_mangle]
pub unsafe extern "C" fn apc_system_free(sys: *mut ApcSystem) {
    if !sys.is_null() {
        drop(Box::from_raw(sys));
    }
}

/// Unknowns, equations and blocks of `sys`. Any output pointer may be NULL.
///
/// # Safety
/// `sys` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn apc_system_dims(
    sys: *const ApcSystem,
    n: *mut usize,
    rows: *mut usize,
    m: *mut usize,
) -> ApcStatus {
    guard(|| {
        let Some(sys) = sys.as_ref() else {
            return fail(ApcStatus::NullPointer, "sys is NULL");
        };
        let s = &sys.inner;
        if !n.is_null() {
            *n = s.n();
        }
        if !rows.is_null() {
            *rows = s.a().rows();
        }
        if !m.is_null() {
            *m = s.m();
        }
        ApcStatus::Ok
    })
}

/// Optimal parameters of `method` for `sys`.
///
/// # Safety
/// `sys` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn apc_optimal_params(
    sys: *const ApcSystem,
    method: ApcMethod,
    out: *mut ApcParams,
) -> ApcStatus {
    guard(|| {
        let (Some(sys), false) = (sys.as_ref(), out.is_null()) else {
            return fail(ApcStatus::NullPointer, "sys or out is NULL");
        };
        match compute_x(&sys.inner).and_then(|s| optimal_params(&sys.inner, &s, method.into())) {
            Ok(p) => {
                *out = p.into();
                ApcStatus::Ok
            }
            Err(e) => report(e),
        }
    })
}

/// Runs `params.method` with the given parameters.
///
/// `max_iters == 0` sizes the budget from the predicted convergence time; a
/// negative `tol` selects the default of 1e-10. With `simulate` set the run
/// goes through the threaded master/worker simulation. On `APC_STATUS_DIVERGED`
/// `out` still receives the partial trace.
///
/// # Safety
/// `sys` must be a live handle, `params` readable and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn apc_solve(
    sys: *const ApcSystem,
    params: *const ApcParams,
    max_iters: usize,
    tol: f64,
    simulate: bool,
    out: *mut *mut ApcTrace,
) -> ApcStatus {
    guard(|| {
        let (Some(sys), Some(params), false) = (sys.as_ref(), params.as_ref(), out.is_null()) else {
            return fail(ApcStatus::NullPointer, "sys, params or out is NULL");
        };
        *out = ptr::null_mut();
        let explicit = MethodParams::explicit(params.method.into(), params.tuning());
        let p = match compute_x(&sys.inner).and_then(|s| predicted_params(&sys.inner, &s, explicit)) {
            Ok(p) => p,
            Err(e) => return report(e),
        };
        let tol = if tol < 0.0 { DEFAULT_TOL } else { tol };
        let budget = if max_iters == 0 {
            Budget {
                tol,
                ..Budget::for_time(p.t_predicted)
            }
        } else {
            Budget::new(max_iters, tol)
        };
        let opts = RunOptions::default();
        let result = if simulate {
            run_simulated(&sys.inner, &p, &budget, &opts, None).map(|r| r.trace)
        } else {
            run(&sys.inner, &p, &budget, &opts)
        };
        match result {
            Ok(inner) => {
                *out = Box::into_raw(Box::new(ApcTrace { inner }));
                ApcStatus::Ok
            }
            Err(Error::Diverged {
                method,
                iteration,
                trace,
            }) => {
                set_last_error(format!("{method} diverged at iteration {iteration}"));
                *out = Box::into_raw(Box::new(ApcTrace { inner: *trace }));
                ApcStatus::Diverged
            }
            Err(e) => report(e),
        }
    })
}

/// # Safety
/// `trace` must come from this library and not be used afterwards. NULL is a no-op.
#[no_mangle]
pub unsafe extern "C" fn apc_trace_free(trace: *mut ApcTrace) {
    if !trace.is_null() {
        drop(Box::from_raw(trace));
    }
}

/// # Safety
/// `trace` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn apc_trace_summary(trace: *const ApcTrace, out: *mut ApcTraceSummary) -> ApcStatus {
    guard(|| {
        let (Some(t), false) = (trace.as_ref(), out.is_null()) else {
            return fail(ApcStatus::NullPointer, "trace or out is NULL");
        };
        let t = &t.inner;
        *out = ApcTraceSummary {
            rounds: t.rounds(),
            converged: t.converged,
            final_error: t.final_error(),
            fitted_rate: t.fitted_rate.unwrap_or(f64::NAN),
            t_empirical: t.t_empirical.unwrap_or(f64::NAN),
            t_predicted: t.params.t_predicted,
        };
        ApcStatus::Ok
    })
}

/// Copies the relative errors, starting with the initial one, into `buf`.
/// `len` receives the full length (`rounds + 1`); at most `cap` values are
/// written, so a NULL `buf` with `cap == 0` queries the size.
///
/// # Safety
/// `trace` must be a live handle, `buf` writable for `cap` values and `len` writable.
#[no_mangle]
pub unsafe extern "C" fn apc_trace_errors(
    trace: *const ApcTrace,
    buf: *mut f64,
    cap: usize,
    len: *mut usize,
) -> ApcStatus {
    guard(|| {
        let (Some(t), false) = (trace.as_ref(), len.is_null()) else {
            return fail(ApcStatus::NullPointer, "trace or len is NULL");
        };
        let t = &t.inner;
        let values: Vec<f64> = std::iter::once(t.initial.error).chain(t.errors()).collect();
        copy_out(&values, buf, cap, len)
    })
}

/// Copies the final master estimate; sizing works as in [`apc_trace_errors`].
///
/// # Safety
/// As for [`apc_trace_errors`].
#[no_mangle]
pub unsafe extern "C" fn apc_trace_solution(
    trace: *const ApcTrace,
    buf: *mut f64,
    cap: usize,
    len: *mut usize,
) -> ApcStatus {
    guard(|| {
        let (Some(t), false) = (trace.as_ref(), len.is_null()) else {
            return fail(ApcStatus::NullPointer, "trace or len is NULL");
        };
        copy_out(&t.inner.x, buf, cap, len)
    })
}

unsafe fn copy_out(values: &[f64], buf: *mut f64, cap: usize, len: *mut usize) -> ApcStatus {
    *len = values.len();
    let k = values.len().min(cap);
    if k > 0 {
        if buf.is_null() {
            return fail(ApcStatus::NullPointer, "buf is NULL");
        }
        ptr::copy_nonoverlapping(values.as_ptr(), buf, k);
    }
    ApcStatus::Ok
}
