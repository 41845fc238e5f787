//! Time-varying capture with behavioural response, `c_l = phi * f_l`.
//!
//! First-capture probabilities `f_l` vary by list; after the first capture
//! the recapture probability is a constant multiple `phi` of `f_l`. The
//! likelihood is maximised over real `N >= x0` by profiling: `f1 = u1 / N`
//! in closed form, `(f2, f3, phi)` by a restarted simplex search.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use super::optim::{golden_section, nelder_mead};
use super::{EstimateResult, Method};
use crate::counts::{MtbSufficientStats, TrsCounts};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MtbOptions {
    /// Hold `phi` fixed instead of estimating it.
    pub phi: Option<f64>,
    /// Upper end of the profile grid as a multiple of `x0`.
    pub max_ratio: f64,
    pub grid_points: usize,
    pub restarts: usize,
}

impl Default for MtbOptions {
    fn default() -> Self {
        Self {
            phi: None,
            max_ratio: 1000.0,
            grid_points: 160,
            restarts: 5,
        }
    }
}

fn xlny(x: f64, y: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x * y.ln()
    }
}

/// Log-likelihood at `N` with `f = (f1, f2, f3)` and `phi`.
pub fn mtb_loglik(s: &MtbSufficientStats, x0: u64, n: f64, f: [f64; 3], phi: f64) -> f64 {
    let x0 = x0 as f64;
    if n < x0 || f.iter().any(|v| !(*v > 0.0 && *v < 1.0)) || phi <= 0.0 {
        return f64::NEG_INFINITY;
    }
    let (u1, u2, u3) = (s.u1 as f64, s.u2 as f64, s.u3 as f64);
    let (m2, m3) = (s.m2 as f64, s.m3 as f64);
    let big_m = [u1, u1 + u2, x0];
    let mut ll = ln_gamma(n + 1.0) - ln_gamma(n - x0 + 1.0);
    ll += xlny(u1, f[0]) + xlny(n - u1, 1.0 - f[0]);
    ll += xlny(m2 + m3, phi);
    for (l, (u, m)) in [(u2, m2), (u3, m3)].into_iter().enumerate() {
        let fl = f[l + 1];
        let recapture = phi * fl;
        let not_recaptured = big_m[l] - m;
        if recapture >= 1.0 && not_recaptured > 0.0 {
            return f64::NEG_INFINITY;
        }
        ll += xlny(u + m, fl) + xlny(n - big_m[l + 1], 1.0 - fl);
        if not_recaptured > 0.0 {
            ll += not_recaptured * (1.0 - recapture).ln();
        }
    }
    ll
}

fn logistic(v: f64) -> f64 {
    1.0 / (1.0 + (-v).exp())
}

struct Profile<'a> {
    stats: &'a MtbSufficientStats,
    x0: u64,
    opts: &'a MtbOptions,
}

impl Profile<'_> {
    fn unpack(&self, n: f64, theta: &[f64]) -> ([f64; 3], f64) {
        let f1 = (self.stats.u1 as f64 / n).clamp(1e-12, 1.0 - 1e-12);
        let phi = self.opts.phi.unwrap_or_else(|| theta[2].exp());
        ([f1, logistic(theta[0]), logistic(theta[1])], phi)
    }

    /// Maximised log-likelihood at `n` and its maximiser.
    fn at(&self, n: f64) -> (f64, [f64; 3], f64) {
        let dim = if self.opts.phi.is_some() { 2 } else { 3 };
        let objective = |theta: &[f64]| {
            let (f, phi) = self.unpack(n, theta);
            let ll = mtb_loglik(self.stats, self.x0, n, f, phi);
            if ll.is_finite() {
                -ll
            } else {
                1e300
            }
        };
        let mut best = (f64::INFINITY, vec![0.0; dim]);
        for r in 0..self.opts.restarts {
            // spread starts over low/high capture and repellent/trap-happy
            let shift = r as f64 - (self.opts.restarts as f64 - 1.0) / 2.0;
            let mut start = vec![-1.0 + 0.6 * shift, -1.0 - 0.4 * shift];
            if dim == 3 {
                start.push(-0.3 * shift);
            }
            let (x, v) = nelder_mead(objective, &start, 0.5, 4000, 1e-12);
            if v < best.0 {
                best = (v, x);
            }
        }
        let (f, phi) = self.unpack(n, &best.1);
        (-best.0, f, phi)
    }
}

pub fn mtb_estimate(counts: &TrsCounts) -> Result<EstimateResult> {
    mtb_estimate_with(counts, &MtbOptions::default())
}

pub fn mtb_estimate_with(counts: &TrsCounts, opts: &MtbOptions) -> Result<EstimateResult> {
    let stats = counts.margins().mtb;
    if stats.m2 + stats.m3 == 0 {
        return Err(Error::Infeasible("no recaptures".into()));
    }
    if let Some(phi) = opts.phi {
        if !(phi > 0.0 && phi.is_finite()) {
            return Err(Error::InvalidParameter(format!("phi must be positive, got {phi}")));
        }
    }
    if opts.grid_points < 3 || opts.restarts == 0 || opts.max_ratio <= 1.0 {
        return Err(Error::InvalidParameter("profile grid is too small".into()));
    }
    let x0 = counts.x0();
    let profile = Profile { stats: &stats, x0, opts };

    let lo = (x0 as f64).ln();
    let hi = (x0 as f64 * opts.max_ratio).ln();
    let grid: Vec<f64> = (0..opts.grid_points)
        .map(|i| (lo + (hi - lo) * i as f64 / (opts.grid_points - 1) as f64).exp())
        .collect();
    let values: Vec<f64> = grid.iter().map(|n| profile.at(*n).0).collect();
    if values.iter().all(|v| !v.is_finite()) {
        return Err(Error::Numerical("likelihood is zero over the whole profile grid".into()));
    }
    let best = (0..grid.len()).max_by(|a, b| values[*a].total_cmp(&values[*b])).unwrap();
    let boundary = best + 1 == grid.len();

    let left = grid[best.saturating_sub(1)];
    let right = grid[(best + 1).min(grid.len() - 1)];
    let (n_hat, _) = golden_section(|n| -profile.at(n).0, left, right, 1e-6 * right);
    let (ll, f, phi) = profile.at(n_hat);

    let mut extras = BTreeMap::new();
    extras.insert("phi".into(), phi);
    extras.insert("f1".into(), f[0]);
    extras.insert("f2".into(), f[1]);
    extras.insert("f3".into(), f[2]);
    extras.insert("loglik".into(), ll);
    extras.insert("boundary".into(), boundary as u8 as f64);
    Ok(EstimateResult::point(Method::Mtb, counts, n_hat.round(), extras))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn no_recaptures_is_infeasible() {
        let c = TrsCounts::new([0, 0, 0, 0, 10, 10, 10]).unwrap();
        assert!(matches!(mtb_estimate(&c), Err(Error::Infeasible(_))));
    }

    #[test]
    fn loglik_rejects_invalid_parameters() {
        let c = TrsCounts::new([155, 31, 131, 45, 56, 30, 332]).unwrap();
        let s = c.margins().mtb;
        assert_eq!(mtb_loglik(&s, 780, 700.0, [0.3, 0.3, 0.3], 1.0), f64::NEG_INFINITY);
        assert_eq!(mtb_loglik(&s, 780, 1000.0, [0.3, 0.6, 0.3], 2.0), f64::NEG_INFINITY);
        assert!(mtb_loglik(&s, 780, 1000.0, [0.3, 0.3, 0.3], 1.0).is_finite());
    }

    #[test]
    fn expected_counts_without_behaviour_recover_n() {
        // expected table at N = 5000 with f = (0.3, 0.4, 0.5), phi = 1
        let (n, f) = (5000.0, [0.3, 0.4, 0.5]);
        let mut cells = [0u64; 7];
        for (idx, pat) in crate::counts::CELL_PATTERNS.iter().enumerate() {
            let p: f64 = (0..3).map(|l| if pat[l] == 1 { f[l] } else { 1.0 - f[l] }).product();
            cells[idx] = (n * p).round() as u64;
        }
        let c = TrsCounts::new(cells).unwrap();
        let opts = MtbOptions { phi: Some(1.0), ..MtbOptions::default() };
        let r = mtb_estimate_with(&c, &opts).unwrap();
        assert!((r.n_hat - 5000.0).abs() < 25.0, "{}", r.n_hat);
        assert_eq!(r.extras["boundary"], 0.0);
    }
}
