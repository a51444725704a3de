use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;

/// The distributed methods this crate knows how to tune and run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Dgd,
    Dnag,
    Dhbm,
    Admm,
    Cimmino,
    Consensus,
    Apc,
    Pdhbm,
}

impl Method {
    /// Every method, in reporting order.
    pub const ALL: [Method; 8] = [
        Method::Dgd,
        Method::Dnag,
        Method::Dhbm,
        Method::Admm,
        Method::Cimmino,
        Method::Consensus,
        Method::Apc,
        Method::Pdhbm,
    ];

    /// The comparison set used by benchmarks: the six tabulated methods plus
    /// preconditioned heavy-ball.
    pub const BENCH: [Method; 7] = [
        Method::Dgd,
        Method::Dnag,
        Method::Dhbm,
        Method::Admm,
        Method::Cimmino,
        Method::Apc,
        Method::Pdhbm,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Dgd => "dgd",
            Method::Dnag => "dnag",
            Method::Dhbm => "dhbm",
            Method::Admm => "admm",
            Method::Cimmino => "cimmino",
            Method::Consensus => "consensus",
            Method::Apc => "apc",
            Method::Pdhbm => "pdhbm",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self, Error> {
        Method::ALL
            .into_iter()
            .find(|m| m.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| {
                Error::InvalidParameter(format!(
                    "unknown method '{s}' (expected one of apc|dgd|dnag|dhbm|admm|cimmino|pdhbm|consensus)"
                ))
            })
    }
}

/// Per-method tuning knobs.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Tuning {
    /// Projection step `gamma` and master memory weight `eta`.
    Apc { gamma: f64, eta: f64 },
    /// Step size of plain gradient descent.
    Dgd { alpha: f64 },
    /// Step and momentum; shared by D-NAG, D-HBM and preconditioned D-HBM.
    Momentum { alpha: f64, beta: f64 },
    /// ADMM penalty.
    Admm { xi: f64 },
    /// Block-Cimmino relaxation.
    Cimmino { nu: f64 },
}

/// Tuned parameters with the rate they are predicted to achieve.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MethodParams {
    pub method: Method,
    #[serde(flatten)]
    pub tuning: Tuning,
    /// Predicted asymptotic contraction factor.
    pub rho: f64,
    /// `1 / -ln(rho)`.
    #[serde(rename = "T")]
    pub t_predicted: f64,
}

impl MethodParams {
    pub fn new(method: Method, tuning: Tuning, rho: f64) -> Self {
        MethodParams {
            method,
            tuning,
            rho,
            t_predicted: super::convergence_time(rho),
        }
    }

    /// Parameters supplied by hand; the rate is unknown.
    pub fn explicit(method: Method, tuning: Tuning) -> Self {
        MethodParams {
            method,
            tuning,
            rho: f64::NAN,
            t_predicted: f64::NAN,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn method_names_round_trip() {
        for m in Method::ALL {
            assert_eq!(m.name().parse::<Method>().unwrap(), m);
        }
        assert!("sgd".parse::<Method>().is_err());
    }

    #[test]
    fn params_serialize_flat() {
        let p = MethodParams::new(Method::Apc, Tuning::Apc { gamma: 1.0, eta: 2.0 }, 0.0);
        let v = serde_json::to_value(p).unwrap();
        assert_eq!(v["method"], "apc");
        assert_eq!(v["gamma"], 1.0);
        assert_eq!(v["eta"], 2.0);
        assert_eq!(v["rho"], 0.0);
        assert_eq!(v["T"], 0.0);
    }
}
