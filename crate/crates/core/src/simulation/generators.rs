//! Synthetic triple-record data.

use rand::Rng;
use rand_distr::{Beta, Distribution, Gamma, Normal};
use serde::{Deserialize, Serialize};

use crate::counts::TrsCounts;
use crate::error::{Error, Result};
use crate::thbm::{logistic, sample_gl1, AlphaVector};

/// Law of one list's effect `b`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum EffectFamily {
    GeneralizedLogistic { shape: f64 },
    Normal { mean: f64, sd: f64 },
    Gamma { shape: f64, scale: f64 },
    Degenerate { value: f64 },
}

impl EffectFamily {
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            EffectFamily::GeneralizedLogistic { shape } => shape > 0.0 && shape.is_finite(),
            EffectFamily::Normal { mean, sd } => mean.is_finite() && sd >= 0.0 && sd.is_finite(),
            EffectFamily::Gamma { shape, scale } => shape > 0.0 && scale > 0.0 && shape.is_finite() && scale.is_finite(),
            EffectFamily::Degenerate { value } => value.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!("invalid effect family {self:?}")))
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            EffectFamily::GeneralizedLogistic { shape } => sample_gl1(rng, shape),
            EffectFamily::Normal { mean, sd } => Normal::new(mean, sd).expect("validated").sample(rng),
            EffectFamily::Gamma { shape, scale } => Gamma::new(shape, scale).expect("validated").sample(rng),
            EffectFamily::Degenerate { value } => value,
        }
    }
}

/// Whether effects are drawn once per individual or once per dataset.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Granularity {
    #[default]
    PerIndividual,
    PerDataset,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EffectSpec {
    pub lists: [EffectFamily; 3],
    #[serde(default)]
    pub granularity: Granularity,
}

impl EffectSpec {
    pub fn generalized_logistic(delta: [f64; 3]) -> Self {
        Self {
            lists: delta.map(|shape| EffectFamily::GeneralizedLogistic { shape }),
            granularity: Granularity::PerIndividual,
        }
    }

    pub fn degenerate(b: [f64; 3]) -> Self {
        Self {
            lists: b.map(|value| EffectFamily::Degenerate { value }),
            granularity: Granularity::PerIndividual,
        }
    }

    pub fn with_granularity(mut self, granularity: Granularity) -> Self {
        self.granularity = granularity;
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.lists.iter().try_for_each(EffectFamily::validate)
    }

    fn probabilities<R: Rng + ?Sized>(&self, rng: &mut R) -> [f64; 3] {
        [0, 1, 2].map(|l| logistic(self.lists[l].sample(rng)))
    }
}

/// Canonical cell index of a capture pattern, `None` for `000`.
fn cell_index(z: [bool; 3]) -> Option<usize> {
    match z {
        [true, true, true] => Some(0),
        [true, true, false] => Some(1),
        [true, false, true] => Some(2),
        [false, true, true] => Some(3),
        [true, false, false] => Some(4),
        [false, true, false] => Some(5),
        [false, false, true] => Some(6),
        [false, false, false] => None,
    }
}

/// Draws one regime index from the mixture weights.
fn pick_regime<R: Rng + ?Sized>(rng: &mut R, weights: &[f64; 5]) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (i, w) in weights.iter().enumerate() {
        acc += w;
        if u < acc {
            return i;
        }
    }
    4
}

/// Population of `true_n` individuals from the dependence mixture.
pub fn gen_thbm<R: Rng + ?Sized>(true_n: u64, alpha: &AlphaVector, effects: &EffectSpec, rng: &mut R) -> Result<TrsCounts> {
    alpha.validate()?;
    effects.validate()?;
    let weights = alpha.regime_weights();
    let shared = match effects.granularity {
        Granularity::PerDataset => Some(effects.probabilities(rng)),
        Granularity::PerIndividual => None,
    };
    let mut cells = [0u64; 7];
    for _ in 0..true_n {
        let p = shared.unwrap_or_else(|| effects.probabilities(rng));
        let x = p.map(|pl| rng.random::<f64>() < pl);
        let z = match pick_regime(rng, &weights) {
            0 => x,
            1 => [x[0], x[0], x[2]],
            2 => [x[0], x[1], x[1]],
            3 => [x[0], x[1], x[0]],
            _ => [x[0], x[0], x[0]],
        };
        if let Some(idx) = cell_index(z) {
            cells[idx] += 1;
        }
    }
    TrsCounts::new(cells)
}

/// First-list capture law for the autoregressive generator.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ArFamily {
    Uniform,
    Beta42,
    Beta22,
}

impl ArFamily {
    pub fn label(&self) -> &'static str {
        match self {
            ArFamily::Uniform => "uniform",
            ArFamily::Beta42 => "beta42",
            ArFamily::Beta22 => "beta22",
        }
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            ArFamily::Uniform => rng.random(),
            ArFamily::Beta42 => Beta::new(4.0, 2.0).unwrap().sample(rng),
            ArFamily::Beta22 => Beta::new(2.0, 2.0).unwrap().sample(rng),
        }
    }
}

/// Next list's capture probability: trap-happy after a capture.
pub fn ar_next_probability(previous: f64, captured: bool) -> f64 {
    let raw = if captured { 1.2 } else { previous };
    raw.min(0.99)
}

/// Population with capture-driven autoregressive probabilities.
pub fn gen_ar_misspec<R: Rng + ?Sized>(true_n: u64, family: ArFamily, rng: &mut R) -> Result<TrsCounts> {
    let mut cells = [0u64; 7];
    for _ in 0..true_n {
        let mut p = family.sample(rng);
        let mut z = [false; 3];
        for j in 0..3 {
            if j > 0 {
                p = ar_next_probability(p, z[j - 1]);
            }
            z[j] = rng.random::<f64>() < p;
        }
        if let Some(idx) = cell_index(z) {
            cells[idx] += 1;
        }
    }
    TrsCounts::new(cells)
}
