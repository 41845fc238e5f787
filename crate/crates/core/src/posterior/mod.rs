//! Posterior summaries, intervals, diagnostics and surveillance rates.

mod histogram;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

pub use histogram::{histogram_svg, Histogram};

use crate::error::{Error, Result};
use crate::thbm::Chain;

pub const MIN_HPD_DRAWS: usize = 100;
pub const MIN_GEWEKE_DRAWS: usize = 1000;

/// Type-7 (linear interpolation) quantile of sorted data.
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    assert!(!sorted.is_empty(), "quantile of empty data");
    let h = (sorted.len() - 1) as f64 * q.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

pub fn median(draws: &[f64]) -> f64 {
    let mut s = draws.to_vec();
    s.sort_by(f64::total_cmp);
    quantile(&s, 0.5)
}

/// Narrowest window holding `ceil(level * n)` of the sorted draws.
pub fn hpd_interval(draws: &[f64], level: f64) -> Result<(f64, f64)> {
    if draws.len() < MIN_HPD_DRAWS {
        return Err(Error::TooFewDraws {
            needed: MIN_HPD_DRAWS,
            got: draws.len(),
        });
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::InvalidParameter(format!("level must lie in (0, 1), got {level}")));
    }
    let mut s = draws.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len();
    let k = ((level * n as f64).ceil() as usize).clamp(1, n);
    let best = (0..=n - k)
        .min_by(|a, b| (s[a + k - 1] - s[*a]).total_cmp(&(s[b + k - 1] - s[*b])))
        .expect("at least one window");
    Ok((s[best], s[best + k - 1]))
}

/// Variance of a segment mean from non-overlapping batch means.
fn batch_mean_variance(seg: &[f64]) -> f64 {
    let batches = (seg.len() as f64).sqrt().floor().max(2.0) as usize;
    let size = seg.len() / batches;
    let means: Vec<f64> = (0..batches)
        .map(|b| seg[b * size..(b + 1) * size].iter().sum::<f64>() / size as f64)
        .collect();
    let m = means.iter().sum::<f64>() / batches as f64;
    let var = means.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (batches - 1) as f64;
    var / batches as f64
}

/// Geweke's comparison of early and late segment means.
pub fn geweke_z(draws: &[f64], frac_a: f64, frac_b: f64) -> Result<f64> {
    if draws.len() < MIN_GEWEKE_DRAWS {
        return Err(Error::TooFewDraws {
            needed: MIN_GEWEKE_DRAWS,
            got: draws.len(),
        });
    }
    if !(frac_a > 0.0 && frac_b > 0.0 && frac_a + frac_b <= 1.0) {
        return Err(Error::InvalidParameter(format!("bad Geweke fractions ({frac_a}, {frac_b})")));
    }
    let n = draws.len();
    let a = &draws[..(frac_a * n as f64) as usize];
    let b = &draws[n - (frac_b * n as f64) as usize..];
    let mean = |s: &[f64]| s.iter().sum::<f64>() / s.len() as f64;
    let var = batch_mean_variance(a) + batch_mean_variance(b);
    if var <= 0.0 {
        return Err(Error::ZeroVariance);
    }
    Ok((mean(a) - mean(b)) / var.sqrt())
}

pub fn rmae(estimates: &[f64], true_n: f64) -> Result<f64> {
    if estimates.is_empty() || true_n <= 0.0 {
        return Err(Error::InvalidParameter("rmae needs estimates and a positive true size".into()));
    }
    Ok(estimates.iter().map(|e| ((e - true_n) / true_n).abs()).sum::<f64>() / estimates.len() as f64)
}

/// Percentage of intervals containing `true_n`.
pub fn coverage_rate(intervals: &[(f64, f64)], true_n: f64) -> Result<f64> {
    if intervals.is_empty() {
        return Err(Error::InvalidParameter("no intervals".into()));
    }
    let hits = intervals.iter().filter(|(lo, hi)| *lo <= true_n && true_n <= *hi).count();
    Ok(100.0 * hits as f64 / intervals.len() as f64)
}

/// Under-reporting rate `(N - x0) / N * 100`.
pub fn ur_rate(n_hat: f64, x0: u64) -> Result<f64> {
    if n_hat < x0 as f64 || n_hat <= 0.0 {
        return Err(Error::InvalidParameter(format!("N = {n_hat} is below x0 = {x0}")));
    }
    Ok((n_hat - x0 as f64) / n_hat * 100.0)
}

/// Incidence per 100,000 inhabitants.
pub fn ir_rate(n_hat: f64, inhabitants: u64) -> Result<f64> {
    if inhabitants == 0 {
        return Err(Error::InvalidParameter("inhabitants must be positive".into()));
    }
    Ok(n_hat / inhabitants as f64 * 1e5)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PosteriorSummary {
    pub draws: usize,
    pub median: f64,
    pub mean: f64,
    /// Mean absolute deviation of the draws from the median.
    pub mae: f64,
    pub level: f64,
    pub hpd_low: f64,
    pub hpd_high: f64,
    pub quantiles: BTreeMap<String, f64>,
}

impl PosteriorSummary {
    pub fn from_draws(draws: &[f64], level: f64) -> Result<Self> {
        let (hpd_low, hpd_high) = hpd_interval(draws, level)?;
        let mut s = draws.to_vec();
        s.sort_by(f64::total_cmp);
        let med = quantile(&s, 0.5);
        let n = s.len() as f64;
        let quantiles = [0.025, 0.25, 0.75, 0.975]
            .iter()
            .map(|q| (format!("q{:.1}", q * 100.0), quantile(&s, *q)))
            .collect();
        Ok(Self {
            draws: s.len(),
            median: med,
            mean: s.iter().sum::<f64>() / n,
            mae: s.iter().map(|v| (v - med).abs()).sum::<f64>() / n,
            level,
            hpd_low,
            hpd_high,
            quantiles,
        })
    }

    /// HPD windows of unimodal chains bracket the median.
    pub fn brackets_median(&self) -> bool {
        self.hpd_low <= self.median && self.median <= self.hpd_high
    }
}

/// Summary of `N` with per-parameter summaries and Geweke scores.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainSummary {
    pub population: PosteriorSummary,
    pub parameters: BTreeMap<String, PosteriorSummary>,
    /// Geweke z per series; series of constant draws are left out.
    pub geweke: BTreeMap<String, f64>,
    pub warnings: Vec<String>,
}

pub const TRACKED: [&str; 11] = [
    "N", "alpha1", "alpha2", "alpha3", "alpha4", "delta1", "delta2", "delta3", "P1", "P2", "P3",
];

pub fn summarize_chain(chain: &Chain, level: f64) -> Result<ChainSummary> {
    let population = PosteriorSummary::from_draws(&chain.population(), level)?;
    let mut parameters = BTreeMap::new();
    let mut geweke = BTreeMap::new();
    let mut warnings = Vec::new();
    if !population.brackets_median() {
        warnings.push("HPD interval of N excludes its median; posterior may be multimodal".into());
    }
    for name in TRACKED {
        let series = chain.series(name)?;
        if name != "N" {
            parameters.insert(name.to_string(), PosteriorSummary::from_draws(&series, level)?);
        }
        match geweke_z(&series, 0.1, 0.5) {
            Ok(z) => {
                if z.abs() > 1.96 {
                    warnings.push(format!("Geweke |z| = {:.2} for {name}", z.abs()));
                }
                geweke.insert(name.to_string(), z);
            }
            Err(Error::ZeroVariance) => {}
            Err(Error::TooFewDraws { .. }) => {
                warnings.push(format!("chain too short for a Geweke test on {name}"));
            }
            Err(e) => return Err(e),
        }
    }
    Ok(ChainSummary {
        population,
        parameters,
        geweke,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand_distr::{Distribution, Exp, StandardNormal};

    use crate::rng::stream;

    #[test]
    fn quantiles_interpolate() {
        let s = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(quantile(&s, 0.0), 1.0);
        assert_eq!(quantile(&s, 1.0), 4.0);
        assert!((quantile(&s, 0.5) - 2.5).abs() < 1e-12);
    }

    #[test]
    fn hpd_of_constant_draws() {
        assert_eq!(hpd_interval(&[3.0; 200], 0.95).unwrap(), (3.0, 3.0));
        assert!(matches!(hpd_interval(&[1.0; 10], 0.95), Err(Error::TooFewDraws { .. })));
    }

    #[test]
    fn hpd_of_uniform_and_exponential() {
        let mut rng = stream(1, 0);
        let u: Vec<f64> = (0..1_000_000).map(|_| rng.random::<f64>()).collect();
        let (lo, hi) = hpd_interval(&u, 0.95).unwrap();
        assert!((hi - lo - 0.95).abs() < 0.01);
        let e: Vec<f64> = Exp::new(1.0).unwrap().sample_iter(&mut rng).take(1_000_000).collect();
        let (lo, hi) = hpd_interval(&e, 0.95).unwrap();
        assert!(lo < 0.01);
        assert!((hi - 2.996).abs() < 0.03, "{hi}");
    }

    #[test]
    fn geweke_behaviour() {
        let mut rng = stream(2, 0);
        let mut big = 0;
        for _ in 0..200 {
            let x: Vec<f64> = (0..2000).map(|_| rng.sample(StandardNormal)).collect();
            if geweke_z(&x, 0.1, 0.5).unwrap().abs() >= 3.0 {
                big += 1;
            }
        }
        assert!(big <= 2);
        let trend: Vec<f64> = (0..10_000).map(|i| i as f64 / 9999.0).collect();
        assert!(geweke_z(&trend, 0.1, 0.5).unwrap().abs() > 5.0);
        assert!(matches!(geweke_z(&[1.0; 2000], 0.1, 0.5), Err(Error::ZeroVariance)));
    }

    #[test]
    fn rates() {
        assert!((rmae(&[180.0, 220.0], 200.0).unwrap() - 0.1).abs() < 1e-12);
        assert_eq!(rmae(&[200.0; 3], 200.0).unwrap(), 0.0);
        assert_eq!(coverage_rate(&[(0.0, f64::INFINITY); 4], 10.0).unwrap(), 100.0);
        assert_eq!(coverage_rate(&[(0.0, 1.0), (5.0, 20.0)], 10.0).unwrap(), 50.0);
        assert!((ur_rate(633.0, 271).unwrap() - 57.19).abs() < 0.01);
        assert_eq!(ur_rate(271.0, 271).unwrap(), 0.0);
        assert!(ur_rate(200.0, 271).is_err());
        assert!((ir_rate(308.0, 3_892_715).unwrap() - 7.91).abs() < 0.01);
        assert!(ir_rate(1.0, 0).is_err());
    }

    #[test]
    fn summary_fields() {
        let draws: Vec<f64> = (0..1000).map(|i| (i % 100) as f64).collect();
        let s = PosteriorSummary::from_draws(&draws, 0.95).unwrap();
        assert!((s.median - 49.5).abs() < 1e-9);
        assert!(s.brackets_median());
        assert_eq!(s.draws, 1000);
    }
}
