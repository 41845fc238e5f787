//! Monte-Carlo marginal likelihood of `(N, alpha, delta)`.
//!
//! Only used to check the sampler; fitting never calls it.

use rand::Rng;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use super::model::{cell_probabilities, logit, AlphaVector, CellProbabilities, DeltaVector};
use crate::counts::TrsCounts;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub log_likelihood: f64,
    /// Delta-method standard error of `log_likelihood`.
    pub std_error: f64,
    pub draws: usize,
}

fn ln_factorial(n: u64) -> f64 {
    ln_gamma(n as f64 + 1.0)
}

/// Log multinomial likelihood of the observed cells plus `N - x0` missed.
pub fn multinomial_loglik(counts: &TrsCounts, population: u64, cp: &CellProbabilities) -> Result<f64> {
    let x0 = counts.x0();
    if population < x0 {
        return Err(Error::InvalidParameter(format!("N = {population} is below x0 = {x0}")));
    }
    let missed = population - x0;
    let mut ll = ln_factorial(population) - ln_factorial(missed);
    for (x, p) in counts.cells().iter().zip(cp.observed()) {
        ll -= ln_factorial(*x);
        if *x > 0 {
            ll += *x as f64 * p.ln();
        }
    }
    if missed > 0 {
        ll += missed as f64 * cp.p000().ln();
    }
    Ok(ll)
}

/// One draw of a generalized logistic type-I variate, `logit(U^{1/delta})`.
pub fn sample_gl1<R: Rng + ?Sized>(rng: &mut R, delta: f64) -> f64 {
    let u: f64 = rng.random_range(f64::MIN_POSITIVE..1.0);
    logit(u.powf(1.0 / delta).clamp(1e-300, 1.0 - 1e-15))
}

/// Averages the cell likelihood over effects drawn by `effects`.
pub fn marginal_loglik_with<R, F>(
    counts: &TrsCounts,
    population: u64,
    alpha: &AlphaVector,
    draws: usize,
    rng: &mut R,
    mut effects: F,
) -> Result<McEstimate>
where
    R: Rng + ?Sized,
    F: FnMut(&mut R) -> [f64; 3],
{
    if draws == 0 {
        return Err(Error::InvalidParameter("at least one draw is required".into()));
    }
    let mut logs = Vec::with_capacity(draws);
    for _ in 0..draws {
        let b = effects(rng);
        let p = b.map(|v| super::model::logistic(v).clamp(1e-300, 1.0 - 1e-15));
        let cp = cell_probabilities(alpha, &p)?;
        logs.push(multinomial_loglik(counts, population, &cp)?);
    }
    let max = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return Err(Error::Numerical("every draw has zero likelihood".into()));
    }
    let scaled: Vec<f64> = logs.iter().map(|l| (l - max).exp()).collect();
    let n = draws as f64;
    let mean = scaled.iter().sum::<f64>() / n;
    let var = if draws > 1 {
        scaled.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    Ok(McEstimate {
        log_likelihood: max + mean.ln(),
        std_error: (var / n).sqrt() / mean,
        draws,
    })
}

/// Monte-Carlo estimate of the marginal log likelihood with
/// `b_l ~ GL-I(delta_l)` independently.
pub fn marginal_loglik_mc<R: Rng + ?Sized>(
    counts: &TrsCounts,
    population: u64,
    alpha: &AlphaVector,
    delta: &DeltaVector,
    draws: usize,
    rng: &mut R,
) -> Result<McEstimate> {
    let d = delta.0;
    marginal_loglik_with(counts, population, alpha, draws, rng, |r| {
        [sample_gl1(r, d[0]), sample_gl1(r, d[1]), sample_gl1(r, d[2])]
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;

    fn ld() -> TrsCounts {
        TrsCounts::new([155, 31, 131, 45, 56, 30, 332]).unwrap()
    }

    #[test]
    fn pinned_effects_match_direct_evaluation() {
        let a = AlphaVector([0.1, 0.05, 0.1, 0.2]);
        let b = [0.3, -0.4, 1.1];
        let mut rng = stream(1, 0);
        let mc = marginal_loglik_with(&ld(), 1100, &a, 10, &mut rng, |_| b).unwrap();
        let cp = cell_probabilities(&a, &b.map(super::super::model::logistic)).unwrap();
        let direct = multinomial_loglik(&ld(), 1100, &cp).unwrap();
        assert!((mc.log_likelihood - direct).abs() < 1e-9);
        assert!(mc.std_error < 1e-12);
    }

    #[test]
    fn gl1_with_unit_shape_is_standard_logistic() {
        let mut rng = stream(2, 0);
        let n = 50_000;
        let below = (0..n).filter(|_| sample_gl1(&mut rng, 1.0) < 0.0).count();
        assert!((below as f64 / n as f64 - 0.5).abs() < 0.01);
    }

    #[test]
    fn rejects_small_population() {
        let cp = cell_probabilities(&AlphaVector::zero(), &[0.5; 3]).unwrap();
        assert!(multinomial_loglik(&ld(), 100, &cp).is_err());
    }
}
