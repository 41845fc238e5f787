//! Population size estimation from three overlapping case lists.
//!
//! The core model is a mixture of list-dependence regimes with random list
//! effects, fitted by data-augmentation Gibbs sampling ([`thbm`]). Classical
//! log-linear, quasi-symmetry, behavioural-response and sample-coverage
//! estimators live in [`classical`]; [`posterior`] summarises chains and
//! [`simulation`] runs seeded replication studies.

pub mod counts;
pub mod error;
pub mod rng;
pub mod classical;
pub mod cli;
pub mod posterior;
pub mod simulation;
pub mod thbm;

pub use counts::{builtin_dataset, builtin_datasets, parse_counts, DatasetMeta, Margins, TrsCounts};
pub use error::{Error, Result};
