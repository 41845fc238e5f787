//! Full conditional draws of the data-augmentation sampler.

use rand::Rng;
use rand_distr::{Beta, Binomial, Distribution, Exp, Gamma, Poisson};
use serde::{Deserialize, Serialize};

use super::model::{
    latent_is_used, latent_split_probabilities, latent_value, AlphaVector, DeltaVector, RandomEffects,
    ALL_PATTERNS, MIXED_CELLS, N_CELLS, N_REGIMES, PROB_CEIL, PROB_FLOOR, UNOBSERVED,
};
use super::prior::Prior;
use crate::counts::TrsCounts;
use crate::error::{Error, Result};

/// Regime membership counts `y[cell][regime]` of the complete population.
///
/// Rows follow [`ALL_PATTERNS`]; row [`UNOBSERVED`] holds the individuals
/// missed by every list.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LatentTable {
    pub y: [[u64; N_REGIMES]; N_CELLS],
}

impl LatentTable {
    /// Everyone observed is independent and nobody is missed.
    pub fn all_independent(counts: &TrsCounts) -> Self {
        let mut y = [[0; N_REGIMES]; N_CELLS];
        for (row, x) in y.iter_mut().zip(counts.cells()) {
            row[0] = x;
        }
        Self { y }
    }

    pub fn population_size(&self) -> u64 {
        self.y.iter().flatten().sum()
    }

    pub fn y111(&self) -> [u64; N_REGIMES] {
        self.y[0]
    }

    pub fn y000(&self) -> [u64; N_REGIMES] {
        self.y[UNOBSERVED]
    }

    /// Individuals of each regime, summed over cells.
    pub fn regime_totals(&self) -> [u64; N_REGIMES] {
        let mut k = [0; N_REGIMES];
        for row in &self.y {
            for (ku, v) in k.iter_mut().zip(row) {
                *ku += v;
            }
        }
        k
    }

    /// Successes and failures of the latent draw of list `list`.
    pub fn list_exponents(&self, list: usize) -> (u64, u64) {
        let (mut m, mut n) = (0, 0);
        for (cell, row) in self.y.iter().enumerate() {
            for (regime, v) in row.iter().enumerate() {
                if !latent_is_used(regime, list) {
                    continue;
                }
                match latent_value(regime, ALL_PATTERNS[cell], list) {
                    Some(1) => m += v,
                    _ => n += v,
                }
            }
        }
        (m, n)
    }

    /// Whether the table is consistent with the observed cells.
    pub fn matches(&self, counts: &TrsCounts) -> bool {
        let structural = MIXED_CELLS.iter().all(|&(cell, dep)| {
            self.y[cell]
                .iter()
                .enumerate()
                .all(|(u, v)| u == 0 || u == dep || *v == 0)
        });
        structural
            && counts
                .cells()
                .iter()
                .zip(&self.y)
                .all(|(x, row)| row.iter().sum::<u64>() == *x)
    }
}

/// Multinomial draw by sequential conditional binomials.
pub fn sample_multinomial<R: Rng + ?Sized>(rng: &mut R, n: u64, probs: &[f64]) -> Result<Vec<u64>> {
    let mut out = vec![0; probs.len()];
    let mut remaining = n;
    let mut mass: f64 = probs.iter().sum();
    for (i, p) in probs.iter().enumerate() {
        if remaining == 0 {
            break;
        }
        if i + 1 == probs.len() || *p >= mass {
            out[i] = remaining;
            break;
        }
        let q = if mass > 0.0 { (p / mass).clamp(0.0, 1.0) } else { 0.0 };
        let draw = binomial(rng, remaining, q)?;
        out[i] = draw;
        remaining -= draw;
        mass -= p;
    }
    Ok(out)
}

pub(crate) fn binomial<R: Rng + ?Sized>(rng: &mut R, n: u64, p: f64) -> Result<u64> {
    if n == 0 || p <= 0.0 {
        return Ok(0);
    }
    if p >= 1.0 {
        return Ok(n);
    }
    let d = Binomial::new(n, p).map_err(|e| Error::Numerical(format!("binomial({n}, {p}): {e}")))?;
    Ok(d.sample(rng))
}

/// Splits every cell into regimes given parameters, keeping `missed`
/// individuals in the unobserved cell.
pub fn sample_latent<R: Rng + ?Sized>(
    rng: &mut R,
    counts: &TrsCounts,
    missed: u64,
    alpha: &AlphaVector,
    effects: &RandomEffects,
) -> Result<LatentTable> {
    let mut totals = [0u64; N_CELLS];
    totals[..7].copy_from_slice(&counts.cells());
    totals[UNOBSERVED] = missed;
    let nonempty = totals.map(|t| t > 0);
    let split = latent_split_probabilities(alpha, &effects.p, &nonempty)?;

    let mut y = [[0u64; N_REGIMES]; N_CELLS];
    for cell in [0, UNOBSERVED] {
        let draw = sample_multinomial(rng, totals[cell], &split.split[cell])?;
        y[cell].copy_from_slice(&draw);
    }
    for &(cell, dep) in &MIXED_CELLS {
        let first = binomial(rng, totals[cell], split.binary_first(cell))?;
        y[cell][0] = first;
        y[cell][dep] = totals[cell] - first;
    }
    let table = LatentTable { y };
    debug_assert!(table.matches(counts));
    debug_assert_eq!(table.y000().iter().sum::<u64>(), missed);
    Ok(table)
}

/// Capture probabilities from their beta full conditionals.
///
/// With `F(b) = (1 + e^{-b})^{-delta}` the conditional of `P_l = logistic(b_l)`
/// is `Beta(m_l + delta_l, n_l + 1)`.
pub fn sample_effects<R: Rng + ?Sized>(
    rng: &mut R,
    table: &LatentTable,
    delta: &DeltaVector,
) -> Result<RandomEffects> {
    let mut p = [0.0; 3];
    for (list, pl) in p.iter_mut().enumerate() {
        let (m, n) = table.list_exponents(list);
        let a = m as f64 + delta.0[list];
        let b = n as f64 + 1.0;
        let d = Beta::new(a, b).map_err(|e| Error::Numerical(format!("beta({a}, {b}): {e}")))?;
        *pl = d.sample(rng).clamp(PROB_FLOOR, PROB_CEIL);
    }
    Ok(RandomEffects::from_probabilities(p).expect("clamped into (0, 1)"))
}

/// Dirichlet draw through normalised gammas; zero parameters give zeros.
pub fn sample_dirichlet<R: Rng + ?Sized>(rng: &mut R, params: &[f64]) -> Result<Vec<f64>> {
    let mut draws = Vec::with_capacity(params.len());
    for &a in params {
        if a == 0.0 {
            draws.push(0.0);
            continue;
        }
        let g = Gamma::new(a, 1.0).map_err(|e| Error::Numerical(format!("gamma({a}, 1): {e}")))?;
        draws.push(g.sample(rng));
    }
    let total: f64 = draws.iter().sum();
    if !(total > 0.0 && total.is_finite()) {
        return Err(Error::Numerical("degenerate Dirichlet draw".into()));
    }
    Ok(draws.into_iter().map(|g| g / total).collect())
}

/// Dependence weights. `pinned[s]` fixes `alpha_{s+1} = 0` (sub-models).
pub fn sample_alpha<R: Rng + ?Sized>(
    rng: &mut R,
    table: &LatentTable,
    prior: &Prior,
    pinned: &[bool; 4],
) -> Result<AlphaVector> {
    let k = table.regime_totals();
    let base = match prior {
        Prior::Jeffreys => [0.5; N_REGIMES],
        Prior::Informative(p) => p.regime_beta(),
    };
    let mut params = [0.0; N_REGIMES];
    for u in 0..N_REGIMES {
        if u > 0 && pinned[u - 1] {
            if k[u] > 0 {
                return Err(Error::Numerical(format!("pinned regime {u} has members")));
            }
            continue;
        }
        params[u] = k[u] as f64 + base[u];
    }
    let w = sample_dirichlet(rng, &params)?;
    Ok(AlphaVector([w[1], w[2], w[3], w[4]]))
}

/// Effect shapes given the current effects.
pub fn sample_delta<R: Rng + ?Sized>(rng: &mut R, effects: &RandomEffects, prior: &Prior) -> Result<DeltaVector> {
    let mut delta = [0.0; 3];
    for (l, d) in delta.iter_mut().enumerate() {
        // ln(1 + e^{-b}) without overflow for very negative b
        let b = effects.b[l];
        let omega = if b < -30.0 { -b } else { (-b).exp().ln_1p() }.max(1e-300);
        *d = match prior {
            Prior::Jeffreys => Exp::new(omega)
                .map_err(|e| Error::Numerical(format!("exp({omega}): {e}")))?
                .sample(rng),
            Prior::Informative(p) => {
                let shape = p.delta_shape[l] + 1.0;
                let scale = 1.0 / (omega + 1.0 / p.delta_scale[l]);
                Gamma::new(shape, scale)
                    .map_err(|e| Error::Numerical(format!("gamma({shape}, {scale}): {e}")))?
                    .sample(rng)
            }
        };
        *d = d.max(f64::MIN_POSITIVE);
    }
    Ok(DeltaVector(delta))
}

/// Negative binomial (failures before `r` successes) as a gamma-Poisson mixture.
pub fn sample_negative_binomial<R: Rng + ?Sized>(rng: &mut R, r: f64, success: f64) -> Result<u64> {
    if !(success > 0.0 && success <= 1.0) || r <= 0.0 {
        return Err(Error::Numerical(format!("negative binomial({r}, {success})")));
    }
    if success == 1.0 {
        return Ok(0);
    }
    let scale = (1.0 - success) / success;
    let lambda = Gamma::new(r, scale)
        .map_err(|e| Error::Numerical(format!("gamma({r}, {scale}): {e}")))?
        .sample(rng);
    if lambda <= 0.0 {
        return Ok(0);
    }
    let pois = Poisson::new(lambda).map_err(|e| Error::Numerical(format!("poisson({lambda}): {e}")))?;
    Ok(pois.sample(rng) as u64)
}

/// Redraws the fully-copied missed individuals, returning the new `N`.
///
/// Only regime-4 members of the `000` cell depend on `N` once the other
/// latent counts are fixed; they are negative binomial with success
/// probability `1 - a4 (1 - P1)`.
pub fn sample_population_size<R: Rng + ?Sized>(
    rng: &mut R,
    table: &mut LatentTable,
    alpha: &AlphaVector,
    effects: &RandomEffects,
) -> Result<u64> {
    let observed: u64 = table.y[..UNOBSERVED].iter().flatten().sum();
    let partial: u64 = table.y[UNOBSERVED][..4].iter().sum();
    let r = (observed + partial) as f64;
    let success = 1.0 - alpha.0[3] * (1.0 - effects.p[0]);
    let extra = sample_negative_binomial(rng, r, success)?;
    table.y[UNOBSERVED][4] = extra;
    Ok(observed + partial + extra)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;

    fn ld() -> TrsCounts {
        TrsCounts::new([155, 31, 131, 45, 56, 30, 332]).unwrap()
    }

    #[test]
    fn initial_table_matches() {
        let t = LatentTable::all_independent(&ld());
        assert!(t.matches(&ld()));
        assert_eq!(t.population_size(), 780);
        assert_eq!(t.list_exponents(0), (373, 407));
    }

    #[test]
    fn list_exponents_follow_copy_rules() {
        let mut t = LatentTable::all_independent(&ld());
        // move ten 110s to the list 1-2 copy: X2 is then unused for them
        t.y[1][0] -= 10;
        t.y[1][1] += 10;
        let (m2, n2) = t.list_exponents(1);
        let (m2_0, n2_0) = LatentTable::all_independent(&ld()).list_exponents(1);
        assert_eq!((m2, n2), (m2_0 - 10, n2_0));
    }

    #[test]
    fn latent_draw_respects_margins() {
        let mut rng = stream(3, 0);
        let a = AlphaVector([0.1, 0.2, 0.05, 0.1]);
        let e = RandomEffects::from_probabilities([0.3, 0.4, 0.5]).unwrap();
        for _ in 0..50 {
            let t = sample_latent(&mut rng, &ld(), 123, &a, &e).unwrap();
            assert!(t.matches(&ld()));
            assert_eq!(t.population_size(), 780 + 123);
        }
    }

    #[test]
    fn multinomial_sums() {
        let mut rng = stream(4, 0);
        let d = sample_multinomial(&mut rng, 1000, &[0.1, 0.0, 0.6, 0.3]).unwrap();
        assert_eq!(d.iter().sum::<u64>(), 1000);
        assert_eq!(d[1], 0);
    }

    #[test]
    fn pinned_alpha_is_zero() {
        let mut rng = stream(5, 0);
        let t = LatentTable::all_independent(&ld());
        let a = sample_alpha(&mut rng, &t, &Prior::Jeffreys, &[true, false, true, true]).unwrap();
        assert_eq!(a.0[0], 0.0);
        assert_eq!(a.0[2], 0.0);
        assert_eq!(a.0[3], 0.0);
        assert!(a.0[1] > 0.0);
    }

    #[test]
    fn no_full_copy_means_no_extra_missed() {
        let mut rng = stream(6, 0);
        let mut t = LatentTable::all_independent(&ld());
        t.y[UNOBSERVED][0] = 40;
        let e = RandomEffects::from_probabilities([0.3, 0.4, 0.5]).unwrap();
        let n = sample_population_size(&mut rng, &mut t, &AlphaVector([0.1, 0.1, 0.1, 0.0]), &e).unwrap();
        assert_eq!(n, 820);
    }

    #[test]
    fn negative_binomial_mean() {
        let mut rng = stream(8, 0);
        let (r, p) = (30.0, 0.7);
        let n = 40_000;
        let mean = (0..n).map(|_| sample_negative_binomial(&mut rng, r, p).unwrap() as f64).sum::<f64>() / n as f64;
        let expected = r * (1.0 - p) / p;
        assert!((mean - expected).abs() < 0.15, "{mean} vs {expected}");
    }
}
