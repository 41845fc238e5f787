//! Generative probabilities of the dependence-mixture model.
//!
//! Every individual falls into one of five dependence regimes. Regime 0 is
//! causally independent; regimes 1-4 copy latent captures between lists:
//!
//! ```text
//! regime 0  (1 - a0)  Z = (X1, X2, X3)
//! regime 1  a1        Z = (X1, X1, X3)
//! regime 2  a2        Z = (X1, X2, X2)
//! regime 3  a3        Z = (X1, X2, X1)
//! regime 4  a4        Z = (X1, X1, X1)
//! ```
//!
//! with `X_l ~ Bernoulli(P_l)` and `P_l = logistic(b_l)`. Cells are indexed
//! by [`ALL_PATTERNS`]: the seven observable cells in canonical order, then
//! the unobserved `000` cell at index [`UNOBSERVED`].

use serde::{Deserialize, Serialize};

use crate::counts::CELL_PATTERNS;
use crate::error::{Error, Result};

pub const N_REGIMES: usize = 5;
pub const N_CELLS: usize = 8;
pub const UNOBSERVED: usize = 7;

pub const ALL_PATTERNS: [[u8; 3]; N_CELLS] = [
    CELL_PATTERNS[0],
    CELL_PATTERNS[1],
    CELL_PATTERNS[2],
    CELL_PATTERNS[3],
    CELL_PATTERNS[4],
    CELL_PATTERNS[5],
    CELL_PATTERNS[6],
    [0, 0, 0],
];

/// Which latent draw each list reads under each regime.
const SOURCE: [[usize; 3]; N_REGIMES] = [[0, 1, 2], [0, 0, 2], [0, 1, 1], [0, 1, 0], [0, 0, 0]];

/// Lower and upper clamps applied to split probabilities.
pub(crate) const PROB_FLOOR: f64 = 1e-300;
pub(crate) const PROB_CEIL: f64 = 1.0 - 1e-15;

/// Dependence weights `(a1, a2, a3, a4)`; `1 - a0` is the independent share.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlphaVector(pub [f64; 4]);

impl AlphaVector {
    pub fn new(alpha: [f64; 4]) -> Result<Self> {
        let a = Self(alpha);
        a.validate()?;
        Ok(a)
    }

    pub fn zero() -> Self {
        Self([0.0; 4])
    }

    pub fn validate(&self) -> Result<()> {
        if self.0.iter().any(|a| !(0.0..=1.0).contains(a)) {
            return Err(Error::InvalidParameter(format!(
                "alpha components must lie in [0, 1], got {:?}",
                self.0
            )));
        }
        if self.total() > 1.0 + 1e-12 {
            return Err(Error::InvalidParameter(format!(
                "alpha components sum to {} > 1",
                self.total()
            )));
        }
        Ok(())
    }

    /// `a0 = a1 + a2 + a3 + a4`.
    pub fn total(&self) -> f64 {
        self.0.iter().sum()
    }

    pub fn independent(&self) -> f64 {
        (1.0 - self.total()).max(0.0)
    }

    /// Mixture weight of each regime, independent regime first.
    pub fn regime_weights(&self) -> [f64; N_REGIMES] {
        [self.independent(), self.0[0], self.0[1], self.0[2], self.0[3]]
    }
}

/// Shapes of the generalized logistic type-I laws of the list effects.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeltaVector(pub [f64; 3]);

impl DeltaVector {
    pub fn new(delta: [f64; 3]) -> Result<Self> {
        if delta.iter().any(|d| !(d.is_finite() && *d > 0.0)) {
            return Err(Error::InvalidParameter(format!(
                "delta components must be positive, got {delta:?}"
            )));
        }
        Ok(Self(delta))
    }
}

/// List effects `b` and the capture probabilities they induce.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RandomEffects {
    pub b: [f64; 3],
    pub p: [f64; 3],
}

impl RandomEffects {
    pub fn from_effects(b: [f64; 3]) -> Self {
        Self {
            b,
            p: b.map(logistic),
        }
    }

    pub fn from_probabilities(p: [f64; 3]) -> Result<Self> {
        check_probabilities(&p)?;
        Ok(Self { b: p.map(logit), p })
    }
}

pub fn logistic(b: f64) -> f64 {
    1.0 / (1.0 + (-b).exp())
}

pub fn logit(p: f64) -> f64 {
    (p / (1.0 - p)).ln()
}

fn check_probabilities(p: &[f64; 3]) -> Result<()> {
    if p.iter().any(|v| !(*v > 0.0 && *v < 1.0)) {
        return Err(Error::InvalidParameter(format!(
            "capture probabilities must lie in (0, 1), got {p:?}"
        )));
    }
    Ok(())
}

/// Probability that an individual in `regime` shows capture `pattern`.
fn regime_term(regime: usize, pattern: [u8; 3], p: &[f64; 3]) -> f64 {
    let src = SOURCE[regime];
    let mut latent: [Option<u8>; 3] = [None; 3];
    for list in 0..3 {
        let s = src[list];
        match latent[s] {
            None => latent[s] = Some(pattern[list]),
            Some(v) if v != pattern[list] => return 0.0,
            Some(_) => {}
        }
    }
    latent
        .iter()
        .zip(p.iter())
        .map(|(x, pl)| match x {
            Some(1) => *pl,
            Some(_) => 1.0 - pl,
            None => 1.0,
        })
        .product()
}

/// Weighted regime contributions `w_u * term(u, cell)` for every cell.
pub fn regime_contributions(alpha: &AlphaVector, p: &[f64; 3]) -> [[f64; N_REGIMES]; N_CELLS] {
    let weights = alpha.regime_weights();
    let mut out = [[0.0; N_REGIMES]; N_CELLS];
    for (cell, pattern) in ALL_PATTERNS.iter().enumerate() {
        for regime in 0..N_REGIMES {
            out[cell][regime] = weights[regime] * regime_term(regime, *pattern, p);
        }
    }
    out
}

/// Whether list `list`'s latent draw `X_list` is read under `regime`.
pub fn latent_is_used(regime: usize, list: usize) -> bool {
    SOURCE[regime].contains(&list)
}

/// Value of `X_list` for an individual of `regime` observed in `pattern`.
pub fn latent_value(regime: usize, pattern: [u8; 3], list: usize) -> Option<u8> {
    SOURCE[regime]
        .iter()
        .position(|s| *s == list)
        .map(|first_list| pattern[first_list])
}

/// Cell probabilities `p_ijk`, indexed like [`ALL_PATTERNS`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellProbabilities(pub [f64; N_CELLS]);

impl CellProbabilities {
    pub fn get(&self, pattern: [u8; 3]) -> f64 {
        let idx = ALL_PATTERNS
            .iter()
            .position(|p| *p == pattern)
            .expect("patterns are binary triples");
        self.0[idx]
    }

    pub fn p000(&self) -> f64 {
        self.0[UNOBSERVED]
    }

    pub fn observed(&self) -> [f64; 7] {
        let mut out = [0.0; 7];
        out.copy_from_slice(&self.0[..7]);
        out
    }

    pub fn sum(&self) -> f64 {
        self.0.iter().sum()
    }
}

pub fn cell_probabilities(alpha: &AlphaVector, p: &[f64; 3]) -> Result<CellProbabilities> {
    alpha.validate()?;
    check_probabilities(p)?;
    let contrib = regime_contributions(alpha, p);
    Ok(CellProbabilities(contrib.map(|row| row.iter().sum())))
}

/// Mixed cells in canonical order with the dependence regime that shares
/// each cell with the independent regime.
pub const MIXED_CELLS: [(usize, usize); 6] = [(1, 1), (2, 3), (3, 2), (4, 2), (5, 3), (6, 1)];

/// Conditional regime membership of each cell's individuals.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SplitProbabilities {
    /// `split[cell][regime]`; each row is a probability simplex (or all zero
    /// when the cell has zero probability).
    pub split: [[f64; N_REGIMES]; N_CELLS],
}

impl SplitProbabilities {
    pub fn q111(&self) -> [f64; N_REGIMES] {
        self.split[0]
    }

    pub fn q000(&self) -> [f64; N_REGIMES] {
        self.split[UNOBSERVED]
    }

    /// Probability that an individual in mixed cell `cell` (canonical index
    /// 1..=6) is causally independent.
    pub fn binary_first(&self, cell: usize) -> f64 {
        self.split[cell][0]
    }
}

/// Normalised regime-membership probabilities per cell.
///
/// `observed_nonempty[cell]` marks cells with positive counts; such a cell
/// with zero total probability is an impossible parameter/data pair.
pub fn latent_split_probabilities(
    alpha: &AlphaVector,
    p: &[f64; 3],
    observed_nonempty: &[bool; N_CELLS],
) -> Result<SplitProbabilities> {
    alpha.validate()?;
    check_probabilities(p)?;
    let contrib = regime_contributions(alpha, p);
    let mut split = [[0.0; N_REGIMES]; N_CELLS];
    for cell in 0..N_CELLS {
        let total: f64 = contrib[cell].iter().sum();
        if total <= 0.0 {
            if observed_nonempty[cell] {
                return Err(Error::Numerical(format!(
                    "cell {:?} has zero probability but positive count",
                    ALL_PATTERNS[cell]
                )));
            }
            continue;
        }
        let mut row = contrib[cell].map(|t| {
            if t > 0.0 {
                (t / total).clamp(PROB_FLOOR, PROB_CEIL)
            } else {
                0.0
            }
        });
        let s: f64 = row.iter().sum();
        row.iter_mut().for_each(|v| *v /= s);
        split[cell] = row;
    }
    Ok(SplitProbabilities { split })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn independent_symmetric_cells_are_eighths() {
        let cp = cell_probabilities(&AlphaVector::zero(), &[0.5; 3]).unwrap();
        for v in cp.0 {
            assert_abs_diff_eq!(v, 0.125, epsilon = 1e-15);
        }
    }

    #[test]
    fn full_copy_collapses_to_first_list() {
        let cp = cell_probabilities(&AlphaVector([0.0, 0.0, 0.0, 1.0]), &[0.6, 0.3, 0.8]).unwrap();
        assert_abs_diff_eq!(cp.get([1, 1, 1]), 0.6, epsilon = 1e-15);
        assert_abs_diff_eq!(cp.p000(), 0.4, epsilon = 1e-15);
        for idx in 1..7 {
            assert_eq!(cp.0[idx], 0.0);
        }
    }

    #[test]
    fn p111_for_equal_dependence() {
        let cp = cell_probabilities(&AlphaVector([0.2; 4]), &[0.5; 3]).unwrap();
        assert_abs_diff_eq!(cp.get([1, 1, 1]), 0.275, epsilon = 1e-15);
    }

    // Term-by-term transcription of the bracketed likelihood factors.
    fn bracket_terms(a: [f64; 4], p: [f64; 3]) -> [f64; 8] {
        let a0: f64 = a.iter().sum();
        let i = 1.0 - a0;
        let [p1, p2, p3] = p;
        let (q1, q2, q3) = (1.0 - p1, 1.0 - p2, 1.0 - p3);
        [
            i * p1 * p2 * p3 + a[0] * p1 * p3 + a[1] * p1 * p2 + a[2] * p1 * p2 + a[3] * p1,
            i * p1 * p2 * q3 + a[0] * p1 * q3,
            i * p1 * q2 * p3 + a[2] * p1 * q2,
            i * q1 * p2 * p3 + a[1] * q1 * p2,
            i * p1 * q2 * q3 + a[1] * p1 * q2,
            i * q1 * p2 * q3 + a[2] * q1 * p2,
            i * q1 * q2 * p3 + a[0] * q1 * p3,
            i * q1 * q2 * q3 + a[0] * q1 * q3 + a[1] * q1 * q2 + a[2] * q1 * q2 + a[3] * q1,
        ]
    }

    #[test]
    fn generic_terms_match_explicit_brackets() {
        let points = [
            ([0.1, 0.2, 0.3, 0.15], [0.3, 0.6, 0.9]),
            ([0.35, 0.15, 0.25, 0.10], [0.05, 0.5, 0.77]),
            ([0.0, 0.0, 0.7, 0.0], [0.2, 0.2, 0.4]),
        ];
        for (a, p) in points {
            let cp = cell_probabilities(&AlphaVector(a), &p).unwrap();
            let brackets = bracket_terms(a, p);
            for c in 0..8 {
                assert_abs_diff_eq!(cp.0[c], brackets[c], epsilon = 1e-15);
            }
        }
    }

    #[test]
    fn invalid_parameters_are_rejected() {
        assert!(cell_probabilities(&AlphaVector([0.5, 0.5, 0.5, 0.0]), &[0.5; 3]).is_err());
        assert!(cell_probabilities(&AlphaVector::zero(), &[0.0, 0.5, 0.5]).is_err());
        assert!(cell_probabilities(&AlphaVector::zero(), &[0.5, 1.0, 0.5]).is_err());
        assert!(AlphaVector::new([-0.1, 0.0, 0.0, 0.0]).is_err());
        assert!(DeltaVector::new([1.0, 0.0, 1.0]).is_err());
    }

    #[test]
    fn split_without_dependence_is_all_independent() {
        let s = latent_split_probabilities(&AlphaVector::zero(), &[0.3, 0.4, 0.5], &[true; 8]).unwrap();
        assert_eq!(s.q111(), [1.0, 0.0, 0.0, 0.0, 0.0]);
        for (cell, _) in MIXED_CELLS {
            assert_eq!(s.binary_first(cell), 1.0);
        }
    }

    #[test]
    fn split_with_full_copy() {
        let mut nonempty = [false; 8];
        nonempty[0] = true;
        nonempty[UNOBSERVED] = true;
        let s = latent_split_probabilities(&AlphaVector([0.0, 0.0, 0.0, 1.0]), &[0.5; 3], &nonempty).unwrap();
        assert_eq!(s.q111()[4], 1.0);
        assert_eq!(s.q000()[4], 1.0);
    }

    #[test]
    fn split_for_equal_dependence() {
        let s = latent_split_probabilities(&AlphaVector([0.2; 4]), &[0.5; 3], &[true; 8]).unwrap();
        let expected = [0.025, 0.05, 0.05, 0.05, 0.1].map(|v| v / 0.275);
        for u in 0..5 {
            assert_abs_diff_eq!(s.q111()[u], expected[u], epsilon = 1e-14);
        }
        // x110 mixes the independent term with the list 1-2 copy
        assert_abs_diff_eq!(s.binary_first(1), 0.025 / (0.025 + 0.05), epsilon = 1e-14);
    }

    #[test]
    fn impossible_cell_is_an_error() {
        let err = latent_split_probabilities(&AlphaVector([0.0, 0.0, 0.0, 1.0]), &[0.5; 3], &[true; 8]);
        assert!(matches!(err, Err(Error::Numerical(_))));
    }

    #[test]
    fn latent_bookkeeping() {
        assert!(latent_is_used(0, 2));
        assert!(!latent_is_used(1, 1));
        assert!(!latent_is_used(4, 2));
        assert_eq!(latent_value(1, [1, 1, 0], 2), Some(0));
        assert_eq!(latent_value(1, [1, 1, 0], 1), None);
        assert_eq!(latent_value(3, [0, 1, 0], 1), Some(1));
    }
}
