//! Poisson log-linear regression on the seven observed cells.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::counts::{TrsCounts, CELL_PATTERNS};
use crate::error::{Error, Result};

const MAX_ITER: usize = 100;
const TOL: f64 = 1e-10;
const RIDGE: f64 = 1e-8;

/// A named column of a design over capture patterns.
pub struct Column {
    pub name: &'static str,
    pub value: fn([u8; 3]) -> f64,
}

/// Builds the 7 x p design matrix from column functions of `(i, j, k)`.
pub fn design(columns: &[Column]) -> DMatrix<f64> {
    DMatrix::from_fn(7, columns.len(), |r, c| (columns[c].value)(CELL_PATTERNS[r]))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GlmFit {
    pub names: Vec<String>,
    pub coefficients: Vec<f64>,
    pub fitted: [f64; 7],
    pub converged: bool,
    pub iterations: usize,
    /// Set when fitted means underflowed and the normal equations were ridged.
    pub ridged: bool,
}

impl GlmFit {
    pub fn coefficient(&self, name: &str) -> Option<f64> {
        self.names.iter().position(|n| n == name).map(|i| self.coefficients[i])
    }
}

fn rank(x: &DMatrix<f64>) -> usize {
    let sv = x.clone().svd(false, false).singular_values;
    let max = sv.iter().cloned().fold(0.0, f64::max);
    sv.iter().filter(|s| **s > max * 1e-10).count()
}

/// Maximum-likelihood Poisson fit by iteratively reweighted least squares.
pub fn poisson_irls(x: &DMatrix<f64>, names: &[&str], counts: &TrsCounts) -> Result<GlmFit> {
    let p = x.ncols();
    if x.nrows() != 7 || p == 0 || p > 7 || names.len() != p {
        return Err(Error::InvalidParameter(format!("design must be 7 x p with 1 <= p <= 7, got 7 x {p}")));
    }
    if rank(x) < p {
        return Err(Error::InvalidParameter(format!("design has rank {} < {p} columns", rank(x))));
    }
    let y = DVector::from_row_slice(&counts.cells_f64());
    let mut mu = y.map(|v| v + 0.5);
    let mut beta = DVector::<f64>::zeros(p);
    let mut ridged = false;
    let mut converged = false;
    let mut iterations = 0;

    for it in 1..=MAX_ITER {
        iterations = it;
        let eta = mu.map(f64::ln);
        let z = DVector::from_fn(7, |r, _| eta[r] + (y[r] - mu[r]) / mu[r]);
        let xtw = DMatrix::from_fn(p, 7, |c, r| x[(r, c)] * mu[r]);
        let mut xtwx = &xtw * x;
        if ridged {
            for d in 0..p {
                xtwx[(d, d)] += RIDGE;
            }
        }
        let rhs = &xtw * &z;
        let new_beta = xtwx
            .clone()
            .cholesky()
            .map(|ch| ch.solve(&rhs))
            .or_else(|| xtwx.lu().solve(&rhs))
            .ok_or_else(|| Error::Numerical("singular weighted normal equations".into()))?;
        let new_mu = (x * &new_beta).map(f64::exp);
        if new_mu.iter().any(|m| !m.is_finite()) {
            return Err(Error::Numerical("Poisson fit diverged".into()));
        }
        let change = (&new_beta - &beta).amax();
        beta = new_beta;
        if new_mu.iter().any(|m| *m < 1e-300) {
            if !ridged {
                ridged = true;
            }
            mu = new_mu.map(|m| m.max(1e-300));
        } else {
            mu = new_mu;
        }
        if it > 1 && change < TOL {
            converged = true;
            break;
        }
    }

    let mut fitted = [0.0; 7];
    fitted.copy_from_slice(mu.as_slice());
    Ok(GlmFit {
        names: names.iter().map(|s| s.to_string()).collect(),
        coefficients: beta.iter().copied().collect(),
        fitted,
        converged,
        iterations,
        ridged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn main_effects() -> Vec<Column> {
        vec![
            Column { name: "intercept", value: |_| 1.0 },
            Column { name: "i", value: |p| p[0] as f64 },
            Column { name: "j", value: |p| p[1] as f64 },
            Column { name: "k", value: |p| p[2] as f64 },
        ]
    }

    fn names(cols: &[Column]) -> Vec<&'static str> {
        cols.iter().map(|c| c.name).collect()
    }

    #[test]
    fn intercept_only_on_flat_counts() {
        let cols = vec![Column { name: "intercept", value: |_| 1.0 }];
        let c = TrsCounts::new([1; 7]).unwrap();
        let fit = poisson_irls(&design(&cols), &names(&cols), &c).unwrap();
        assert!(fit.converged);
        for m in fit.fitted {
            assert!((m - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn saturated_fit_reproduces_counts() {
        let mut cols = main_effects();
        cols.push(Column { name: "ij", value: |p| (p[0] * p[1]) as f64 });
        cols.push(Column { name: "ik", value: |p| (p[0] * p[2]) as f64 });
        cols.push(Column { name: "jk", value: |p| (p[1] * p[2]) as f64 });
        let c = TrsCounts::new([155, 31, 131, 45, 56, 30, 332]).unwrap();
        let fit = poisson_irls(&design(&cols), &names(&cols), &c).unwrap();
        for (m, x) in fit.fitted.iter().zip(c.cells_f64()) {
            assert!((m - x).abs() < 1e-8 * x.max(1.0));
        }
    }

    #[test]
    fn main_effects_match_list_margins() {
        let cols = main_effects();
        let c = TrsCounts::new([155, 31, 131, 45, 56, 30, 332]).unwrap();
        let fit = poisson_irls(&design(&cols), &names(&cols), &c).unwrap();
        assert!(fit.converged);
        let m = c.margins();
        for (list, target) in [(0, m.n1), (1, m.n2), (2, m.n3)] {
            let s: f64 = (0..7).filter(|r| CELL_PATTERNS[*r][list] == 1).map(|r| fit.fitted[r]).sum();
            assert!((s - target as f64).abs() < 1e-6, "{s} vs {target}");
        }
        assert!(fit.coefficient("intercept").is_some());
    }

    #[test]
    fn rank_deficient_design_is_rejected() {
        let cols = vec![
            Column { name: "a", value: |_| 1.0 },
            Column { name: "b", value: |_| 2.0 },
        ];
        let c = TrsCounts::new([1; 7]).unwrap();
        assert!(poisson_irls(&design(&cols), &names(&cols), &c).is_err());
    }
}
