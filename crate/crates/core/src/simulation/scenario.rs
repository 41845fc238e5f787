//! Named simulation scenarios.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::generators::{ArFamily, EffectFamily, EffectSpec, Granularity};
use crate::classical::Method;
use crate::error::{Error, Result};
use crate::thbm::{AlphaVector, GibbsConfig, InformativePrior, Prior};

/// An estimator run inside a replication.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Estimator {
    Thbm,
    Sc,
    Llm,
    Independent,
    Qsm,
    Pqsm,
    Mtb,
}

impl Estimator {
    pub fn classical(&self) -> Option<Method> {
        match self {
            Estimator::Thbm => None,
            Estimator::Sc => Some(Method::Sc),
            Estimator::Llm => Some(Method::Llm),
            Estimator::Independent => Some(Method::Independent),
            Estimator::Qsm => Some(Method::Qsm),
            Estimator::Pqsm => Some(Method::Pqsm),
            Estimator::Mtb => Some(Method::Mtb),
        }
    }

    pub fn parse_list(s: &str) -> Result<Vec<Estimator>> {
        s.split(',').map(str::trim).filter(|t| !t.is_empty()).map(str::parse).collect()
    }
}

impl FromStr for Estimator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.eq_ignore_ascii_case("thbm") {
            return Ok(Estimator::Thbm);
        }
        Ok(match s.parse::<Method>()? {
            Method::Sc => Estimator::Sc,
            Method::Llm => Estimator::Llm,
            Method::Independent => Estimator::Independent,
            Method::Qsm => Estimator::Qsm,
            Method::Pqsm => Estimator::Pqsm,
            Method::Mtb => Estimator::Mtb,
        })
    }
}

impl fmt::Display for Estimator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.classical() {
            Some(m) => write!(f, "{m}"),
            None => f.write_str("thbm"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Generator {
    Mixture { alpha: AlphaVector, effects: EffectSpec },
    Autoregressive { first_list: ArFamily },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub name: String,
    pub true_n: u64,
    pub generator: Generator,
    pub replications: usize,
    pub estimators: Vec<Estimator>,
    pub gibbs: GibbsConfig,
    pub prior: Prior,
    /// Bootstrap replicates for competitor intervals.
    pub bootstrap: usize,
    pub level: f64,
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        if self.replications == 0 {
            return Err(Error::InvalidConfig("replications must be at least 1".into()));
        }
        if self.true_n == 0 {
            return Err(Error::InvalidConfig("true population size must be positive".into()));
        }
        if self.estimators.is_empty() {
            return Err(Error::InvalidConfig("no estimators requested".into()));
        }
        if !(self.level > 0.0 && self.level < 1.0) {
            return Err(Error::InvalidConfig(format!("level must lie in (0, 1), got {}", self.level)));
        }
        if let Generator::Mixture { alpha, effects } = &self.generator {
            alpha.validate()?;
            effects.validate()?;
        }
        self.gibbs.validate()?;
        self.prior.validate()
    }

    pub fn granularity(&self) -> Option<Granularity> {
        match &self.generator {
            Generator::Mixture { effects, .. } => Some(effects.granularity),
            Generator::Autoregressive { .. } => None,
        }
    }
}

pub fn populations() -> [(&'static str, AlphaVector); 6] {
    [
        ("P1", AlphaVector([0.35, 0.15, 0.25, 0.10])),
        ("P2", AlphaVector([0.30, 0.30, 0.15, 0.10])),
        ("P3", AlphaVector([0.20, 0.10, 0.20, 0.10])),
        ("P4", AlphaVector([0.10, 0.20, 0.30, 0.20])),
        ("P5", AlphaVector([0.20, 0.20, 0.20, 0.20])),
        ("P6", AlphaVector([0.25, 0.15, 0.35, 0.10])),
    ]
}

pub const DELTA_GRID: [[f64; 3]; 5] = [
    [1.6, 1.2, 0.8],
    [1.3, 1.7, 0.9],
    [1.0, 1.4, 1.8],
    [0.8, 0.8, 0.8],
    [1.6, 1.6, 1.6],
];

pub const SIZES: [u64; 2] = [200, 500];

/// Misspecified effect laws R1..R6.
pub fn misspecified_effects() -> [(&'static str, [EffectFamily; 3]); 6] {
    let gl = |shape| EffectFamily::GeneralizedLogistic { shape };
    let normal = |mean| EffectFamily::Normal { mean, sd: 1.0 };
    let gamma = |shape| EffectFamily::Gamma { shape, scale: 0.5 };
    [
        ("R1", [gl(1.6), gl(1.6), gl(1.6)]),
        ("R2", [gl(1.6), gl(1.2), gl(0.8)]),
        ("R3", [normal(0.5), normal(0.5), normal(0.5)]),
        ("R4", [normal(0.5), normal(0.0), normal(-0.5)]),
        ("R5", [gamma(2.0), gamma(2.0), gamma(2.0)]),
        ("R6", [gamma(2.0), gamma(1.0), gamma(0.5)]),
    ]
}

pub const DEFAULT_ESTIMATORS: [Estimator; 4] = [Estimator::Thbm, Estimator::Sc, Estimator::Llm, Estimator::Independent];

/// Default per-replication settings: 50k sweeps, half burned, thin 10.
pub fn base_scenario(name: impl Into<String>, true_n: u64, generator: Generator) -> Scenario {
    Scenario {
        name: name.into(),
        true_n,
        generator,
        replications: 100,
        estimators: DEFAULT_ESTIMATORS.to_vec(),
        gibbs: GibbsConfig::new(50_000, 25_000, 10, 0),
        prior: Prior::Jeffreys,
        bootstrap: 200,
        level: 0.95,
    }
}

/// Informative prior centred on the generating parameters.
pub fn centered_prior(alpha: &AlphaVector, delta: [f64; 3]) -> Prior {
    Prior::Informative(InformativePrior::centered(alpha.0, delta, 8.0, 100.0).expect("valid preset"))
}

/// The full catalogue: dependence x shape x size under both priors, the
/// misspecified-effect grid, and the autoregressive variants.
pub fn standard_scenarios() -> Vec<Scenario> {
    let mut out = Vec::new();
    for (pname, alpha) in populations() {
        for (d, delta) in DELTA_GRID.iter().enumerate() {
            for n in SIZES {
                let gen = Generator::Mixture {
                    alpha,
                    effects: EffectSpec::generalized_logistic(*delta),
                };
                let name = format!("{pname}:delta{}:N{n}", d + 1);
                let mut informative = base_scenario(format!("{name}:informative"), n, gen.clone());
                informative.prior = centered_prior(&alpha, *delta);
                out.push(base_scenario(name, n, gen));
                out.push(informative);
            }
        }
    }
    for (pname, alpha) in populations() {
        for (rname, lists) in misspecified_effects() {
            for n in SIZES {
                let effects = EffectSpec {
                    lists,
                    granularity: Granularity::PerIndividual,
                };
                out.push(base_scenario(format!("{pname}:{rname}:N{n}"), n, Generator::Mixture { alpha, effects }));
            }
        }
    }
    for family in [ArFamily::Uniform, ArFamily::Beta42, ArFamily::Beta22] {
        for n in SIZES {
            out.push(base_scenario(
                format!("AR:{}:N{n}", family.label()),
                n,
                Generator::Autoregressive { first_list: family },
            ));
        }
    }
    out
}

/// Looks a preset up by name. `AR:<family>` without a size means `N500`.
pub fn scenario_by_name(name: &str) -> Result<Scenario> {
    let full = match name.split(':').collect::<Vec<_>>().as_slice() {
        ["AR", family] => format!("AR:{family}:N500"),
        _ => name.to_string(),
    };
    standard_scenarios()
        .into_iter()
        .find(|s| s.name == full)
        .ok_or_else(|| Error::InvalidConfig(format!("unknown scenario preset `{name}`")))
}
