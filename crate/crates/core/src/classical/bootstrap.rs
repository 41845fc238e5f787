//! Conditional multinomial bootstrap for the classical estimators.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::Method;
use crate::counts::TrsCounts;
use crate::error::{Error, Result};
use crate::posterior::quantile;
use crate::rng::stream;
use crate::thbm::sample_multinomial;

pub const MIN_REPLICATES: usize = 100;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BootstrapCi {
    pub ci_low: f64,
    pub ci_high: f64,
    /// Mean absolute deviation of replicate estimates from the original.
    pub mae: f64,
    pub replicates: usize,
    pub failures: usize,
}

/// Resamples `x0` individuals over the observed cells, in proportion to
/// the observed counts.
pub fn resample<R: rand::Rng + ?Sized>(rng: &mut R, counts: &TrsCounts) -> Result<TrsCounts> {
    let probs = counts.cells_f64();
    let draw = sample_multinomial(rng, counts.x0(), &probs)?;
    let mut cells = [0u64; 7];
    cells.copy_from_slice(&draw);
    TrsCounts::new(cells)
}

/// Percentile interval of any point estimator.
pub fn bootstrap_with<F>(estimator: F, counts: &TrsCounts, replicates: usize, level: f64, seed: u64) -> Result<BootstrapCi>
where
    F: Fn(&TrsCounts) -> Result<f64> + Sync,
{
    if replicates < MIN_REPLICATES {
        return Err(Error::InvalidParameter(format!(
            "at least {MIN_REPLICATES} bootstrap replicates are required, got {replicates}"
        )));
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::InvalidParameter(format!("level must lie in (0, 1), got {level}")));
    }
    let original = estimator(counts)?;
    let results: Vec<Option<f64>> = (0..replicates)
        .into_par_iter()
        .map(|b| {
            let mut rng = stream(seed, b as u64);
            let sample = resample(&mut rng, counts).ok()?;
            estimator(&sample).ok().filter(|v| v.is_finite())
        })
        .collect();
    let mut estimates: Vec<f64> = results.into_iter().flatten().collect();
    let failures = replicates - estimates.len();
    if failures * 2 > replicates {
        return Err(Error::Numerical(format!(
            "estimator failed on {failures} of {replicates} bootstrap replicates"
        )));
    }
    estimates.sort_by(f64::total_cmp);
    let tail = (1.0 - level) / 2.0;
    let mae = estimates.iter().map(|v| (v - original).abs()).sum::<f64>() / estimates.len() as f64;
    Ok(BootstrapCi {
        ci_low: quantile(&estimates, tail),
        ci_high: quantile(&estimates, 1.0 - tail),
        mae,
        replicates: estimates.len(),
        failures,
    })
}

pub fn bootstrap_ci(method: Method, counts: &TrsCounts, replicates: usize, level: f64, seed: u64) -> Result<BootstrapCi> {
    bootstrap_with(|c| method.estimate(c).map(|r| r.n_hat), counts, replicates, level, seed)
}
