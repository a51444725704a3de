use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::solvers::{Budget, RunOptions, DEFAULT_TOL};
use crate::spectral::{Method, MethodParams, Tuning};

/// `n,N,mean,seed` of a synthetic Gaussian system.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    pub n: usize,
    pub rows: usize,
    pub mean: f64,
    pub seed: u64,
}

impl std::str::FromStr for SynthSpec {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        let bad = || Error::InvalidParameter(format!("--synth expects n,N,mean,seed, got '{s}'"));
        if parts.len() != 4 {
            return Err(bad());
        }
        Ok(SynthSpec {
            n: parts[0].parse().map_err(|_| bad())?,
            rows: parts[1].parse().map_err(|_| bad())?,
            mean: parts[2].parse().map_err(|_| bad())?,
            seed: parts[3].parse().map_err(|_| bad())?,
        })
    }
}

/// Everything a command needs. Flags override a JSON config file; the merged
/// result is echoed into every output manifest.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub command: String,
    pub input: Option<PathBuf>,
    pub rhs: Option<PathBuf>,
    pub solution: Option<PathBuf>,
    pub fixture: Option<String>,
    pub synth: Option<SynthSpec>,
    /// Seed of `x*` when the right-hand side has to be synthesized.
    pub solution_seed: Option<u64>,
    pub m: Option<usize>,
    pub m_sweep: Option<Vec<usize>>,
    pub methods: Option<Vec<String>>,
    pub gamma: Option<f64>,
    pub eta: Option<f64>,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub xi: Option<f64>,
    pub nu: Option<f64>,
    pub optimal: bool,
    pub tol: Option<f64>,
    pub max_iters: Option<usize>,
    pub simulate: bool,
    pub permute_seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub log_messages: bool,
    pub zero_init: bool,
    pub admm_dual: bool,
}

macro_rules! overlay {
    ($dst:ident, $src:ident; $($opt:ident),*; $($flag:ident),*) => {
        $( if $src.$opt.is_some() { $dst.$opt = $src.$opt.clone(); } )*
        $( $dst.$flag |= $src.$flag; )*
    };
}

impl RunConfig {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::InvalidParameter(format!("config {}: {e}", path.display())))
    }

    /// Applies every field set in `flags` on top of `self`.
    pub fn overlay(mut self, flags: &RunConfig) -> Self {
        let base = &mut self;
        overlay!(base, flags;
            input, rhs, solution, fixture, synth, solution_seed, m, m_sweep, methods,
            gamma, eta, alpha, beta, xi, nu, tol, max_iters, permute_seed, out;
            optimal, simulate, log_messages, zero_init, admm_dual);
        self.command = flags.command.clone();
        self
    }

    pub fn methods_or(&self, default: &[Method]) -> Result<Vec<Method>> {
        match &self.methods {
            None => Ok(default.to_vec()),
            Some(list) => {
                let parsed = list
                    .iter()
                    .flat_map(|s| s.split(','))
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(str::parse)
                    .collect::<Result<Vec<Method>>>()?;
                if parsed.is_empty() {
                    return Err(Error::InvalidParameter("empty method set".into()));
                }
                Ok(parsed)
            }
        }
    }

    fn explicit_knobs(&self) -> Vec<&'static str> {
        [
            ("gamma", self.gamma),
            ("eta", self.eta),
            ("alpha", self.alpha),
            ("beta", self.beta),
            ("xi", self.xi),
            ("nu", self.nu),
        ]
        .into_iter()
        .filter(|(_, v)| v.is_some())
        .map(|(k, _)| k)
        .collect()
    }

    /// Hand-set parameters for `method`, or `None` when tuning is requested.
    pub fn explicit_params(&self, method: Method) -> Result<Option<MethodParams>> {
        let given = self.explicit_knobs();
        if self.optimal && !given.is_empty() {
            return Err(Error::InvalidParameter(format!(
                "--optimal cannot be combined with explicit --{}",
                given.join("/--")
            )));
        }
        if given.is_empty() {
            return Ok(None);
        }
        let need = |name: &str, v: Option<f64>| {
            v.ok_or_else(|| Error::InvalidParameter(format!("method {method} needs --{name}")))
        };
        let (tuning, used): (Tuning, &[&str]) = match method {
            Method::Apc => (
                Tuning::Apc {
                    gamma: need("gamma", self.gamma)?,
                    eta: need("eta", self.eta)?,
                },
                &["gamma", "eta"],
            ),
            Method::Dgd => (
                Tuning::Dgd {
                    alpha: need("alpha", self.alpha)?,
                },
                &["alpha"],
            ),
            Method::Dnag | Method::Dhbm | Method::Pdhbm => (
                Tuning::Momentum {
                    alpha: need("alpha", self.alpha)?,
                    beta: need("beta", self.beta)?,
                },
                &["alpha", "beta"],
            ),
            Method::Admm => (
                Tuning::Admm {
                    xi: need("xi", self.xi)?,
                },
                &["xi"],
            ),
            Method::Cimmino => (
                Tuning::Cimmino {
                    nu: need("nu", self.nu)?,
                },
                &["nu"],
            ),
            Method::Consensus => (Tuning::Apc { gamma: 1.0, eta: 1.0 }, &[]),
        };
        if let Some(extra) = given.iter().find(|k| !used.contains(k)) {
            return Err(Error::InvalidParameter(format!(
                "--{extra} does not apply to method {method}"
            )));
        }
        Ok(Some(MethodParams::explicit(method, tuning)))
    }

    /// Budget for a run predicted to take `t_predicted` per e-fold.
    pub fn budget(&self, t_predicted: f64) -> Result<Budget> {
        let mut b = Budget::for_time(t_predicted);
        if let Some(t) = self.tol {
            if !(t >= 0.0) {
                return Err(Error::InvalidParameter(format!("--tol must be non-negative, got {t}")));
            }
            b.tol = t;
        } else {
            b.tol = DEFAULT_TOL;
        }
        if let Some(k) = self.max_iters {
            b.max_iters = k;
        }
        Ok(b)
    }

    /// Budget override for tables, where each row otherwise sizes its own.
    pub fn table_budget(&self) -> Result<Option<Budget>> {
        match self.max_iters {
            Some(k) => Ok(Some(Budget::new(k, self.budget(f64::NAN)?.tol))),
            None if self.tol.is_some() => Err(Error::InvalidParameter("--tol for tables requires --max-iters".into())),
            None => Ok(None),
        }
    }

    pub fn run_options(&self) -> RunOptions {
        RunOptions {
            zero_init: self.zero_init,
            x0: None,
            record_iterates: false,
            admm_dual: self.admm_dual,
        }
    }
}
