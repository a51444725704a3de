//! Worker and master update rules. The sequential engine and the simulated
//! network both call these, so their traces agree to the last bit.

use crate::error::{Error, Result};
use crate::linalg::{cholesky_spd, DenseMatrix, RowBasis, SpdFactor};
use crate::spectral::{Method, MethodParams, Tuning};

/// Per-round update rule with its parameters.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Kernel {
    Apc {
        gamma: f64,
        eta: f64,
    },
    Dgd {
        alpha: f64,
    },
    Nag {
        alpha: f64,
        beta: f64,
    },
    HeavyBall {
        alpha: f64,
        beta: f64,
    },
    /// `dual = false` pins every `y_i` to zero.
    Admm {
        xi: f64,
        dual: bool,
    },
    Cimmino {
        nu: f64,
    },
}

impl Kernel {
    pub fn from_params(params: &MethodParams, admm_dual: bool) -> Result<Self> {
        let k = match (params.method, params.tuning) {
            (Method::Apc | Method::Consensus, Tuning::Apc { gamma, eta }) => Kernel::Apc { gamma, eta },
            (Method::Dgd, Tuning::Dgd { alpha }) => Kernel::Dgd { alpha },
            (Method::Dnag, Tuning::Momentum { alpha, beta }) => Kernel::Nag { alpha, beta },
            (Method::Dhbm | Method::Pdhbm, Tuning::Momentum { alpha, beta }) => Kernel::HeavyBall { alpha, beta },
            (Method::Admm, Tuning::Admm { xi }) => {
                if !(xi > 0.0) {
                    return Err(Error::InvalidParameter(format!(
                        "ADMM penalty must be positive, got {xi}"
                    )));
                }
                Kernel::Admm { xi, dual: admm_dual }
            }
            (Method::Cimmino, Tuning::Cimmino { nu }) => Kernel::Cimmino { nu },
            (m, t) => {
                return Err(Error::InvalidParameter(format!(
                    "parameters {t:?} do not apply to method {m}"
                )))
            }
        };
        Ok(k)
    }
}

#[derive(Clone, Debug)]
enum WorkerAux {
    None,
    Admm {
        /// Factor of `A_i A_i^T + xi I`.
        shifted: SpdFactor,
        /// `Some` only for the unmodified iteration.
        y: Option<Vec<f64>>,
        fresh: bool,
    },
}

/// One worker: its block, an orthonormal basis of its row space and its local iterate.
#[derive(Clone, Debug)]
pub struct WorkerState {
    pub index: usize,
    a: DenseMatrix,
    b: Vec<f64>,
    basis: RowBasis,
    /// Local iterate `x_i(t)`; for gradient methods it only holds `x_i(0)`.
    pub x: Vec<f64>,
    aux: WorkerAux,
}

/// Builds worker `index` and its minimum-norm block solution `x_i(0) = A_i^+ b_i`.
pub fn init_worker(index: usize, a: &DenseMatrix, b: &[f64]) -> Result<WorkerState> {
    if b.len() != a.rows() {
        return Err(Error::DimensionMismatch(format!(
            "block {index}: {} rows, {} right-hand sides",
            a.rows(),
            b.len()
        )));
    }
    cholesky_spd(&a.gram_rows()).map_err(|_| Error::RankDeficientBlock { block: index })?;
    let basis = RowBasis::new(a);
    let mut w = WorkerState {
        index,
        a: a.clone(),
        b: b.to_vec(),
        basis,
        x: Vec::new(),
        aux: WorkerAux::None,
    };
    w.x = w.pinv_apply(b.to_vec());
    Ok(w)
}

impl WorkerState {
    pub fn a(&self) -> &DenseMatrix {
        &self.a
    }

    pub fn b(&self) -> &[f64] {
        &self.b
    }

    /// `A_i^+ r`, consuming `r`.
    pub fn pinv_apply(&self, r: Vec<f64>) -> Vec<f64> {
        self.basis.pinv_apply(r)
    }

    /// `P_i v = v - A_i^+ A_i v`.
    pub fn project(&self, v: &[f64]) -> Vec<f64> {
        let u = self.basis.project_onto(v);
        v.iter().zip(&u).map(|(a, b)| a - b).collect()
    }

    /// Caches whatever `kernel` needs beyond the row basis.
    pub fn prepare(&mut self, kernel: &Kernel) -> Result<()> {
        if let Kernel::Admm { xi, dual } = *kernel {
            let mut g = self.a.gram_rows();
            for k in 0..g.rows() {
                g[(k, k)] += xi;
            }
            let shifted = cholesky_spd(&g)?;
            self.aux = WorkerAux::Admm {
                shifted,
                y: dual.then(|| vec![0.0; self.a.cols()]),
                fresh: true,
            };
        }
        Ok(())
    }

    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let mut r = vec![0.0; self.a.rows()];
        self.a.mat_vec_into(x, &mut r);
        for (ri, bi) in r.iter_mut().zip(&self.b) {
            *ri -= bi;
        }
        let mut g = vec![0.0; self.a.cols()];
        self.a.transpose_mat_vec_into(&r, &mut g);
        g
    }
}

/// `x_i <- x_i + gamma P_i (x_bar - x_i)`, through two `p x n` products and one
/// solve with the cached factor.
pub fn worker_step_apc(w: &mut WorkerState, x_bar: &[f64], gamma: f64) {
    let v: Vec<f64> = x_bar.iter().zip(&w.x).map(|(a, b)| a - b).collect();
    let pv = w.project(&v);
    for (xi, p) in w.x.iter_mut().zip(&pv) {
        *xi += gamma * p;
    }
}

/// One worker round: consume the master's broadcast, return the response.
pub fn worker_round(kernel: &Kernel, w: &mut WorkerState, broadcast: &[f64]) -> Vec<f64> {
    match *kernel {
        Kernel::Apc { gamma, .. } => {
            worker_step_apc(w, broadcast, gamma);
            w.x.clone()
        }
        Kernel::Dgd { .. } | Kernel::Nag { .. } | Kernel::HeavyBall { .. } => w.gradient(broadcast),
        Kernel::Cimmino { .. } => {
            let mut r = vec![0.0; w.a.rows()];
            w.a.mat_vec_into(broadcast, &mut r);
            for (ri, bi) in r.iter_mut().zip(&w.b) {
                *ri = bi - *ri;
            }
            w.pinv_apply(r)
        }
        Kernel::Admm { xi, .. } => {
            let WorkerAux::Admm { shifted, y, fresh } = &mut w.aux else {
                panic!("worker {} not prepared for ADMM", w.index);
            };
            if let Some(y) = y.as_mut() {
                // y_i(t) += xi (x_i(t) - x_bar(t)), deferred until x_bar(t) arrives
                if !*fresh {
                    for ((yj, xj), bj) in y.iter_mut().zip(&w.x).zip(broadcast) {
                        *yj += xi * (xj - bj);
                    }
                }
            }
            *fresh = false;
            // x_i = x_bar + (A^T A + xi I)^{-1} (A^T (b - A x_bar) - y), with
            // (A^T A + xi I)^{-1} A^T = A^T (A A^T + xi I)^{-1}
            let mut s = vec![0.0; w.a.rows()];
            w.a.mat_vec_into(broadcast, &mut s);
            for (sj, bj) in s.iter_mut().zip(&w.b) {
                *sj = bj - *sj;
            }
            shifted.solve_in_place(&mut s);
            w.x.copy_from_slice(broadcast);
            let mut u = vec![0.0; w.a.cols()];
            w.a.transpose_mat_vec_into(&s, &mut u);
            for (xj, uj) in w.x.iter_mut().zip(&u) {
                *xj += uj;
            }
            if let Some(y) = y.as_ref() {
                // (A^T A + xi I)^{-1} y = (y - A^T (A A^T + xi I)^{-1} A y) / xi
                let mut ay = vec![0.0; w.a.rows()];
                w.a.mat_vec_into(y, &mut ay);
                shifted.solve_in_place(&mut ay);
                w.a.transpose_mat_vec_into(&ay, &mut u);
                for ((xj, yj), uj) in w.x.iter_mut().zip(y).zip(&u) {
                    *xj -= (yj - uj) / xi;
                }
            }
            w.x.clone()
        }
    }
}

#[derive(Clone, Debug)]
enum MasterAux {
    None,
    /// Previous lookahead `y(t)`.
    Nag(Vec<f64>),
    /// Momentum `z(t)`.
    HeavyBall(Vec<f64>),
}

/// The master's shared vector and the method's memory.
#[derive(Clone, Debug)]
pub struct MasterState {
    pub x_bar: Vec<f64>,
    pub t: usize,
    aux: MasterAux,
}

impl MasterState {
    pub fn new(kernel: &Kernel, x0: Vec<f64>) -> Self {
        let aux = match kernel {
            Kernel::Nag { .. } => MasterAux::Nag(x0.clone()),
            Kernel::HeavyBall { .. } => MasterAux::HeavyBall(vec![0.0; x0.len()]),
            _ => MasterAux::None,
        };
        MasterState { x_bar: x0, t: 0, aux }
    }
}

/// Sum of worker vectors in ascending block order.
pub fn ordered_sum(responses: &[Vec<f64>], n: usize) -> Vec<f64> {
    let mut s = vec![0.0; n];
    for r in responses {
        for (sj, rj) in s.iter_mut().zip(r) {
            *sj += rj;
        }
    }
    s
}

/// Plain block average, used for `x_bar(0)`.
pub fn average(vectors: &[Vec<f64>], n: usize) -> Vec<f64> {
    let m = vectors.len() as f64;
    let mut s = ordered_sum(vectors, n);
    for v in &mut s {
        *v /= m;
    }
    s
}

/// `x_bar <- (eta/m) sum_i x_i + (1 - eta) x_bar`.
pub fn master_step_apc(x_bar: &mut [f64], iterates: &[Vec<f64>], eta: f64) {
    let s = ordered_sum(iterates, x_bar.len());
    let w = eta / iterates.len() as f64;
    for (x, sj) in x_bar.iter_mut().zip(&s) {
        *x = w * sj + (1.0 - eta) * *x;
    }
}

/// One master round over the `m` responses, in block order.
pub fn master_round(kernel: &Kernel, ms: &mut MasterState, responses: &[Vec<f64>]) {
    let n = ms.x_bar.len();
    match *kernel {
        Kernel::Apc { eta, .. } => master_step_apc(&mut ms.x_bar, responses, eta),
        Kernel::Dgd { alpha } => {
            let g = ordered_sum(responses, n);
            for (x, gj) in ms.x_bar.iter_mut().zip(&g) {
                *x -= alpha * gj;
            }
        }
        Kernel::Nag { alpha, beta } => {
            let MasterAux::Nag(y_prev) = &mut ms.aux else {
                unreachable!()
            };
            let g = ordered_sum(responses, n);
            for j in 0..n {
                let y = ms.x_bar[j] - alpha * g[j];
                ms.x_bar[j] = (1.0 + beta) * y - beta * y_prev[j];
                y_prev[j] = y;
            }
        }
        Kernel::HeavyBall { alpha, beta } => {
            let MasterAux::HeavyBall(z) = &mut ms.aux else {
                unreachable!()
            };
            let g = ordered_sum(responses, n);
            for j in 0..n {
                z[j] = beta * z[j] + g[j];
                ms.x_bar[j] -= alpha * z[j];
            }
        }
        Kernel::Admm { .. } => ms.x_bar = average(responses, n),
        Kernel::Cimmino { nu } => {
            let s = ordered_sum(responses, n);
            for (x, sj) in ms.x_bar.iter_mut().zip(&s) {
                *x += nu * sj;
            }
        }
    }
    ms.t += 1;
}
