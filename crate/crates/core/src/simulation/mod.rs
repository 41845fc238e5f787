//! Data generators and the replication engine for simulation studies.

pub mod generators;
pub mod runner;
pub mod scenario;

pub use generators::{ar_next_probability, gen_ar_misspec, gen_thbm, ArFamily, EffectFamily, EffectSpec, Granularity};
pub use runner::{aggregate, generate, run_replications, EstimatorSummary, Outcome, Replication, SimReport};
pub use scenario::{
    base_scenario, centered_prior, misspecified_effects, populations, scenario_by_name, standard_scenarios, Estimator,
    Generator, Scenario, DEFAULT_ESTIMATORS, DELTA_GRID, SIZES,
};
