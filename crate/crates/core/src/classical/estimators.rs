//! Closed-form and log-linear estimators.

use std::collections::BTreeMap;

use super::glm::{design, poisson_irls, Column, GlmFit};
use super::{EstimateResult, Method};
use crate::counts::TrsCounts;
use crate::error::{Error, Result};

fn base_columns() -> Vec<Column> {
    vec![
        Column { name: "intercept", value: |_| 1.0 },
        Column { name: "s1", value: |p| p[0] as f64 },
        Column { name: "s2", value: |p| p[1] as f64 },
        Column { name: "s3", value: |p| p[2] as f64 },
    ]
}

fn fit(columns: &[Column], counts: &TrsCounts) -> Result<GlmFit> {
    let names: Vec<&str> = columns.iter().map(|c| c.name).collect();
    let fit = poisson_irls(&design(columns), &names, counts)?;
    if !fit.converged {
        return Err(Error::Numerical(format!("Poisson fit did not converge in {} iterations", fit.iterations)));
    }
    Ok(fit)
}

/// `m111 m100 m010 m001 / (m110 m101 m011)` on canonical-order means.
fn no_second_order(m: &[f64; 7]) -> Result<f64> {
    let [m111, m110, m101, m011, m100, m010, m001] = *m;
    let den = m110 * m101 * m011;
    if den <= 0.0 {
        return Err(Error::Infeasible("a pairwise-overlap cell is zero".into()));
    }
    Ok(m111 * m100 * m010 * m001 / den)
}

fn glm_extras(fit: &GlmFit) -> BTreeMap<String, f64> {
    let mut extras: BTreeMap<String, f64> = fit
        .names
        .iter()
        .zip(&fit.coefficients)
        .map(|(n, c)| (format!("coef_{n}"), *c))
        .collect();
    extras.insert("iterations".into(), fit.iterations as f64);
    if fit.ridged {
        extras.insert("ridge".into(), 1.0);
    }
    extras
}

/// No-three-factor log-linear model. It is saturated on the observed cells,
/// so the fitted means are the counts themselves.
pub fn llm_estimate(counts: &TrsCounts) -> Result<EstimateResult> {
    let m000 = no_second_order(&counts.cells_f64())?;
    Ok(EstimateResult::point(Method::Llm, counts, counts.x0() as f64 + m000, BTreeMap::new()))
}

/// Main-effects log-linear model; `m000 = exp(intercept)`.
pub fn independent_estimate(counts: &TrsCounts) -> Result<EstimateResult> {
    let m = counts.margins();
    if m.n1 == 0 || m.n2 == 0 || m.n3 == 0 {
        return Err(Error::Infeasible("a list is empty".into()));
    }
    let fit = fit(&base_columns(), counts)?;
    let m000 = fit.coefficient("intercept").expect("intercept column").exp();
    Ok(EstimateResult::point(Method::Independent, counts, counts.x0() as f64 + m000, glm_extras(&fit)))
}

/// Quasi-symmetry with a common heterogeneity term for two captures.
///
/// Only `gamma(2)` is identifiable on the seven observed cells: an
/// indicator of triple capture is a linear combination of the intercept,
/// the list effects and the pair indicator there.
pub fn qsm_estimate(counts: &TrsCounts) -> Result<EstimateResult> {
    let mut cols = base_columns();
    cols.push(Column { name: "gamma2", value: |p| ((p[0] + p[1] + p[2]) == 2) as u8 as f64 });
    let fit = fit(&cols, counts)?;
    let m000 = no_second_order(&fit.fitted)?;
    Ok(EstimateResult::point(Method::Qsm, counts, counts.x0() as f64 + m000, glm_extras(&fit)))
}

/// Partial quasi-symmetry: lists 1 and 2 share a heterogeneity pattern.
pub fn pqsm_estimate(counts: &TrsCounts) -> Result<EstimateResult> {
    let mut cols = base_columns();
    cols.push(Column { name: "gamma20", value: |p| ((p[0] + p[1]) == 2) as u8 as f64 });
    cols.push(Column { name: "gamma_k", value: |p| ((p[0] + p[1]) * p[2]) as f64 });
    let fit = fit(&cols, counts)?;
    let m000 = no_second_order(&fit.fitted)?;
    Ok(EstimateResult::point(Method::Pqsm, counts, counts.x0() as f64 + m000, glm_extras(&fit)))
}

/// Sample-coverage estimator. Flags infeasibility when the result is
/// below the number observed.
pub fn sc_estimate(counts: &TrsCounts) -> Result<EstimateResult> {
    let m = counts.margins();
    if m.n1 == 0 || m.n2 == 0 || m.n3 == 0 {
        return Err(Error::Infeasible("a list is empty".into()));
    }
    let (n1, n2, n3) = (m.n1 as f64, m.n2 as f64, m.n3 as f64);
    let c_hat = 1.0 - (counts.x100() as f64 / n1 + counts.x010() as f64 / n2 + counts.x001() as f64 / n3) / 3.0;
    if c_hat <= 0.0 {
        return Err(Error::Infeasible(format!("estimated sample coverage {c_hat} is not positive")));
    }
    let f = |v: u64| v as f64;
    let overlap = f(m.x_11) + f(m.x1_1) + f(m.x11_);
    let correction = (f(m.x1_0) + f(m.x_10)) * f(m.x11_) / (n1 * n2)
        + (f(m.x10_) + f(m.x_01)) * f(m.x1_1) / (n1 * n3)
        + (f(m.x0_1) + f(m.x01_)) * f(m.x_11) / (n2 * n3);
    let bracket = 1.0 - correction / (3.0 * c_hat);
    if bracket <= 0.0 {
        return Err(Error::Infeasible("sample-coverage correction exceeds one".into()));
    }
    let n_hat = overlap / (3.0 * c_hat) / bracket;
    let mut extras = BTreeMap::new();
    extras.insert("coverage".into(), c_hat);
    Ok(EstimateResult::point(Method::Sc, counts, n_hat, extras))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ld() -> TrsCounts {
        TrsCounts::new([155, 31, 131, 45, 56, 30, 332]).unwrap()
    }

    #[test]
    fn llm_closed_form() {
        let r = llm_estimate(&ld()).unwrap();
        let expected = 780.0 + (155.0 * 332.0 * 56.0 * 30.0) / (131.0 * 45.0 * 31.0);
        assert!((r.n_hat - expected).abs() < 1e-9);
        assert_eq!(llm_estimate(&TrsCounts::new([1; 7]).unwrap()).unwrap().n_hat, 8.0);
    }

    #[test]
    fn llm_zero_denominator_is_infeasible() {
        let c = TrsCounts::new([5, 0, 3, 2, 4, 4, 4]).unwrap();
        assert!(matches!(llm_estimate(&c), Err(Error::Infeasible(_))));
    }

    #[test]
    fn independent_on_exact_independence() {
        let r = independent_estimate(&TrsCounts::new([100; 7]).unwrap()).unwrap();
        assert!((r.n_hat - 800.0).abs() < 1e-6);
    }

    #[test]
    fn sc_complete_coverage() {
        let r = sc_estimate(&TrsCounts::new([30, 0, 0, 0, 0, 0, 0]).unwrap()).unwrap();
        assert_eq!(r.extras["coverage"], 1.0);
        assert!((r.n_hat - 30.0).abs() < 1e-12);
        assert!(r.feasible);
    }

    #[test]
    fn qsm_fits_symmetric_table_exactly() {
        // 20*12 = 15*16 = 10*24 satisfies both quasi-symmetry constraints
        let c = TrsCounts::new([7, 10, 15, 20, 12, 16, 24]).unwrap();
        let mut cols = base_columns();
        cols.push(Column { name: "gamma2", value: |p| ((p[0] + p[1] + p[2]) == 2) as u8 as f64 });
        let f = fit(&cols, &c).unwrap();
        for (m, x) in f.fitted.iter().zip(c.cells_f64()) {
            assert!((m - x).abs() < 1e-7);
        }
    }

    #[test]
    fn pqsm_fits_pairwise_table_where_qsm_does_not() {
        // x011*x100 = x101*x010 = 240 but x110*x001 = 100
        let c = TrsCounts::new([7, 10, 15, 20, 12, 16, 10]).unwrap();
        let mut q = base_columns();
        q.push(Column { name: "gamma2", value: |p| ((p[0] + p[1] + p[2]) == 2) as u8 as f64 });
        let mut pq = base_columns();
        pq.push(Column { name: "gamma20", value: |p| ((p[0] + p[1]) == 2) as u8 as f64 });
        pq.push(Column { name: "gamma_k", value: |p| ((p[0] + p[1]) * p[2]) as f64 });
        let fq = fit(&q, &c).unwrap();
        let fp = fit(&pq, &c).unwrap();
        let dev = |f: &GlmFit| f.fitted.iter().zip(c.cells_f64()).map(|(m, x)| (m - x).abs()).fold(0.0, f64::max);
        assert!(dev(&fp) < 1e-7);
        assert!(dev(&fq) > 0.1);
    }
}
