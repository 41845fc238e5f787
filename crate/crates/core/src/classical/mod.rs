//! Classical closed-population estimators.

pub mod bootstrap;
pub mod estimators;
pub mod glm;
pub mod mtb;
pub mod optim;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use bootstrap::{bootstrap_ci, bootstrap_with, resample, BootstrapCi};
pub use estimators::{independent_estimate, llm_estimate, pqsm_estimate, qsm_estimate, sc_estimate};
pub use glm::{poisson_irls, GlmFit};
pub use mtb::{mtb_estimate, mtb_estimate_with, MtbOptions};

use crate::counts::TrsCounts;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Sc,
    Llm,
    Independent,
    Qsm,
    Pqsm,
    Mtb,
}

impl Method {
    pub const ALL: [Method; 6] = [Method::Sc, Method::Qsm, Method::Pqsm, Method::Llm, Method::Mtb, Method::Independent];

    pub fn name(&self) -> &'static str {
        match self {
            Method::Sc => "sc",
            Method::Llm => "llm",
            Method::Independent => "independent",
            Method::Qsm => "qsm",
            Method::Pqsm => "pqsm",
            Method::Mtb => "mtb",
        }
    }

    pub fn estimate(&self, counts: &TrsCounts) -> Result<EstimateResult> {
        match self {
            Method::Sc => sc_estimate(counts),
            Method::Llm => llm_estimate(counts),
            Method::Independent => independent_estimate(counts),
            Method::Qsm => qsm_estimate(counts),
            Method::Pqsm => pqsm_estimate(counts),
            Method::Mtb => mtb_estimate(counts),
        }
    }

    /// Parses a comma-separated list such as `sc,llm,independent`.
    pub fn parse_list(s: &str) -> Result<Vec<Method>> {
        s.split(',').map(str::trim).filter(|t| !t.is_empty()).map(str::parse).collect()
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "sc" => Ok(Method::Sc),
            "llm" => Ok(Method::Llm),
            "independent" | "ind" => Ok(Method::Independent),
            "qsm" => Ok(Method::Qsm),
            "pqsm" => Ok(Method::Pqsm),
            "mtb" => Ok(Method::Mtb),
            _ => Err(Error::UnknownMethod(s.to_string())),
        }
    }
}

/// A point estimate with optional interval and method-specific extras.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimateResult {
    pub method: Method,
    pub n_hat: f64,
    /// False when the estimate is below the number of observed individuals.
    pub feasible: bool,
    pub ci_low: Option<f64>,
    pub ci_high: Option<f64>,
    pub mae: Option<f64>,
    pub extras: BTreeMap<String, f64>,
}

pub const CSV_HEADER: [&str; 6] = ["method", "n_hat", "mae", "ci_low", "ci_high", "feasible"];

impl EstimateResult {
    pub(crate) fn point(method: Method, counts: &TrsCounts, n_hat: f64, extras: BTreeMap<String, f64>) -> Self {
        Self {
            method,
            n_hat,
            feasible: n_hat >= counts.x0() as f64,
            ci_low: None,
            ci_high: None,
            mae: None,
            extras,
        }
    }

    pub fn with_bootstrap(mut self, ci: &BootstrapCi) -> Self {
        self.ci_low = Some(ci.ci_low);
        self.ci_high = Some(ci.ci_high);
        self.mae = Some(ci.mae);
        self.extras.insert("bootstrap_failures".into(), ci.failures as f64);
        self
    }

    pub fn csv_row(&self) -> Vec<String> {
        let opt = |v: Option<f64>| v.map(|x| format!("{x:.2}")).unwrap_or_default();
        vec![
            self.method.to_string(),
            format!("{:.2}", self.n_hat),
            opt(self.mae),
            opt(self.ci_low),
            opt(self.ci_high),
            self.feasible.to_string(),
        ]
    }
}
