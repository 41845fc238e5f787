//! Parallel, seeded replication engine.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::generators::{gen_ar_misspec, gen_thbm, Granularity};
use super::scenario::{Estimator, Generator, Scenario};
use crate::classical::bootstrap_ci;
use crate::counts::TrsCounts;
use crate::error::Result;
use crate::posterior::{coverage_rate, hpd_interval, median, rmae};
use crate::rng::{child_seed, stream};
use crate::thbm::{run_gibbs, GibbsConfig};

/// What one estimator produced on one dataset.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Outcome {
    Estimated { estimate: f64, ci_low: f64, ci_high: f64 },
    /// Point estimate below the number observed.
    Infeasible { estimate: f64 },
    Failed { reason: String },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Replication {
    pub index: usize,
    pub counts: Option<TrsCounts>,
    pub outcomes: BTreeMap<Estimator, Outcome>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimatorSummary {
    pub estimator: Estimator,
    pub used: usize,
    pub failures: usize,
    pub infeasible: usize,
    pub mean_estimate: Option<f64>,
    pub rmae: Option<f64>,
    /// Percentage of intervals covering the true size.
    pub coverage: Option<f64>,
    pub mean_ci_low: Option<f64>,
    pub mean_ci_high: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimReport {
    pub scenario: String,
    pub true_n: u64,
    pub replications: usize,
    pub seed: u64,
    pub granularity: Option<Granularity>,
    pub bootstrap: usize,
    pub level: f64,
    /// Replications whose generated data had nobody observed.
    pub empty_datasets: usize,
    pub summaries: Vec<EstimatorSummary>,
    pub details: Vec<Replication>,
}

pub const CSV_HEADER: [&str; 10] = [
    "scenario",
    "estimator",
    "mean_estimate",
    "rmae",
    "coverage",
    "mean_ci_low",
    "mean_ci_high",
    "used",
    "failures",
    "infeasible",
];

impl SimReport {
    pub fn summary(&self, estimator: Estimator) -> Option<&EstimatorSummary> {
        self.summaries.iter().find(|s| s.estimator == estimator)
    }

    pub fn to_csv(&self) -> String {
        let opt = |v: Option<f64>| v.map(|x| format!("{x:.4}")).unwrap_or_default();
        let mut out = CSV_HEADER.join(",") + "\n";
        for s in &self.summaries {
            let row = [
                self.scenario.clone(),
                s.estimator.to_string(),
                opt(s.mean_estimate),
                opt(s.rmae),
                opt(s.coverage),
                opt(s.mean_ci_low),
                opt(s.mean_ci_high),
                s.used.to_string(),
                s.failures.to_string(),
                s.infeasible.to_string(),
            ];
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }
}

/// Folds outcomes into the table row; failures and infeasible estimates are
/// excluded from the averages.
pub fn aggregate<'a>(estimator: Estimator, true_n: f64, outcomes: impl IntoIterator<Item = &'a Outcome>) -> EstimatorSummary {
    let (mut estimates, mut intervals) = (Vec::new(), Vec::new());
    let (mut failures, mut infeasible) = (0, 0);
    for o in outcomes {
        match o {
            Outcome::Estimated { estimate, ci_low, ci_high } => {
                estimates.push(*estimate);
                intervals.push((*ci_low, *ci_high));
            }
            Outcome::Infeasible { .. } => infeasible += 1,
            Outcome::Failed { .. } => failures += 1,
        }
    }
    let mean = |v: &[f64]| (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64);
    let lows: Vec<f64> = intervals.iter().map(|i| i.0).collect();
    let highs: Vec<f64> = intervals.iter().map(|i| i.1).collect();
    EstimatorSummary {
        estimator,
        used: estimates.len(),
        failures,
        infeasible,
        mean_estimate: mean(&estimates),
        rmae: rmae(&estimates, true_n).ok(),
        coverage: coverage_rate(&intervals, true_n).ok(),
        mean_ci_low: mean(&lows),
        mean_ci_high: mean(&highs),
    }
}

fn run_estimator(estimator: Estimator, counts: &TrsCounts, scenario: &Scenario, seed: u64) -> Outcome {
    let result: Result<(f64, f64, f64)> = match estimator.classical() {
        None => {
            let cfg = GibbsConfig { seed, ..scenario.gibbs.clone() };
            run_gibbs(counts, &scenario.prior, &cfg).and_then(|chain| {
                let n = chain.population();
                let (lo, hi) = hpd_interval(&n, scenario.level)?;
                Ok((median(&n), lo, hi))
            })
        }
        Some(method) => match method.estimate(counts) {
            Ok(r) if !r.feasible => return Outcome::Infeasible { estimate: r.n_hat },
            Ok(r) => bootstrap_ci(method, counts, scenario.bootstrap, scenario.level, seed)
                .map(|ci| (r.n_hat, ci.ci_low, ci.ci_high)),
            Err(e) => Err(e),
        },
    };
    match result {
        Ok((estimate, ci_low, ci_high)) => Outcome::Estimated { estimate, ci_low, ci_high },
        Err(e) => Outcome::Failed { reason: e.to_string() },
    }
}

/// Generates one dataset for replication `index`.
pub fn generate(scenario: &Scenario, seed: u64, index: usize) -> Result<TrsCounts> {
    let mut rng = stream(seed, index as u64);
    match &scenario.generator {
        Generator::Mixture { alpha, effects } => gen_thbm(scenario.true_n, alpha, effects, &mut rng),
        Generator::Autoregressive { first_list } => gen_ar_misspec(scenario.true_n, *first_list, &mut rng),
    }
}

/// Runs every replication of `scenario`; the report depends only on the
/// scenario and `seed`.
pub fn run_replications(scenario: &Scenario, seed: u64) -> Result<SimReport> {
    scenario.validate()?;
    let details: Vec<Replication> = (0..scenario.replications)
        .into_par_iter()
        .map(|index| {
            let rep_seed = child_seed(seed, index as u64);
            let counts = generate(scenario, seed, index).ok();
            let outcomes = scenario
                .estimators
                .iter()
                .enumerate()
                .map(|(k, est)| {
                    let outcome = match &counts {
                        Some(c) => run_estimator(*est, c, scenario, child_seed(rep_seed, k as u64)),
                        None => Outcome::Failed { reason: "no individual observed".into() },
                    };
                    (*est, outcome)
                })
                .collect();
            Replication { index, counts, outcomes }
        })
        .collect();

    let summaries = scenario
        .estimators
        .iter()
        .map(|est| aggregate(*est, scenario.true_n as f64, details.iter().filter_map(|r| r.outcomes.get(est))))
        .collect();
    Ok(SimReport {
        scenario: scenario.name.clone(),
        true_n: scenario.true_n,
        replications: scenario.replications,
        seed,
        granularity: scenario.granularity(),
        bootstrap: scenario.bootstrap,
        level: scenario.level,
        empty_datasets: details.iter().filter(|r| r.counts.is_none()).count(),
        summaries,
        details,
    })
}
