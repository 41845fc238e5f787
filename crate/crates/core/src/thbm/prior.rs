use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Prior on the dependence weights and the effect shapes.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "regime", rename_all = "snake_case")]
pub enum Prior {
    /// Jeffreys-type reference prior: Dirichlet(1/2, ..., 1/2) weights and
    /// `1/delta` on each shape.
    #[default]
    Jeffreys,
    Informative(InformativePrior),
}

/// Dirichlet weights and gamma shape priors.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InformativePrior {
    /// `beta1..beta4` for the dependence weights, `beta5` for the
    /// independent share.
    pub beta: [f64; 5],
    /// Gamma shape for each `delta_l`.
    pub delta_shape: [f64; 3],
    /// Gamma scale for each `delta_l`; `f64::INFINITY` is allowed.
    pub delta_scale: [f64; 3],
}

impl InformativePrior {
    /// Prior centred on known parameters: `beta_i = concentration * alpha_i`
    /// (with `alpha_5 = 1 - a0`) and gamma shapes with mean `delta_l` and
    /// variance `variance`.
    pub fn centered(alpha: [f64; 4], delta: [f64; 3], concentration: f64, variance: f64) -> Result<Self> {
        let a0: f64 = alpha.iter().sum();
        let beta = [alpha[0], alpha[1], alpha[2], alpha[3], 1.0 - a0].map(|a| concentration * a);
        let p = Self {
            beta,
            delta_shape: delta.map(|d| d * d / variance),
            delta_scale: delta.map(|d| variance / d),
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.beta.iter().any(|b| !(b.is_finite() && *b > 0.0)) {
            return Err(Error::InvalidParameter(format!(
                "Dirichlet weights must be positive, got {:?}",
                self.beta
            )));
        }
        // shape 0 with infinite scale is the reference limit, so 0 is allowed
        if self.delta_shape.iter().any(|g| !(g.is_finite() && *g >= 0.0)) {
            return Err(Error::InvalidParameter(format!(
                "delta shapes must be non-negative, got {:?}",
                self.delta_shape
            )));
        }
        if self.delta_scale.iter().any(|l| l.is_nan() || *l <= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "delta scales must be positive, got {:?}",
                self.delta_scale
            )));
        }
        Ok(())
    }

    /// Dirichlet parameters in regime order (independent first).
    pub(crate) fn regime_beta(&self) -> [f64; 5] {
        [self.beta[4], self.beta[0], self.beta[1], self.beta[2], self.beta[3]]
    }
}

impl Prior {
    pub fn validate(&self) -> Result<()> {
        match self {
            Prior::Jeffreys => Ok(()),
            Prior::Informative(p) => p.validate(),
        }
    }

    pub fn is_jeffreys(&self) -> bool {
        matches!(self, Prior::Jeffreys)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn centered_prior_moments() {
        let p = InformativePrior::centered([0.35, 0.15, 0.25, 0.10], [1.6, 1.2, 0.8], 8.0, 100.0).unwrap();
        assert!((p.beta[4] - 8.0 * 0.15).abs() < 1e-12);
        for l in 0..3 {
            let mean = p.delta_shape[l] * p.delta_scale[l];
            let var = p.delta_shape[l] * p.delta_scale[l] * p.delta_scale[l];
            assert!((mean - [1.6, 1.2, 0.8][l]).abs() < 1e-12);
            assert!((var - 100.0).abs() < 1e-9);
        }
    }

    #[test]
    fn rejects_bad_hyperparameters() {
        let mut p = InformativePrior::centered([0.1; 4], [1.0; 3], 8.0, 100.0).unwrap();
        p.beta[2] = 0.0;
        assert!(p.validate().is_err());
        let mut p = InformativePrior::centered([0.1; 4], [1.0; 3], 8.0, 100.0).unwrap();
        p.delta_scale[0] = -1.0;
        assert!(Prior::Informative(p).validate().is_err());
    }

    #[test]
    fn serde_tagging() {
        let json = serde_json::to_string(&Prior::Jeffreys).unwrap();
        assert_eq!(json, r#"{"regime":"jeffreys"}"#);
        let p: Prior = serde_json::from_str(
            r#"{"regime":"informative","beta":[1,1,1,1,4],"delta_shape":[1,1,1],"delta_scale":[2,2,2]}"#,
        )
        .unwrap();
        assert!(!p.is_jeffreys());
    }
}
