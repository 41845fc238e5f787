//! The data-augmentation Gibbs sampler and its retained chain.

use std::io::Write;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::conditionals::{
    sample_alpha, sample_delta, sample_effects, sample_latent, sample_population_size, LatentTable,
};
use super::model::{AlphaVector, DeltaVector, RandomEffects, UNOBSERVED};
use super::prior::Prior;
use crate::counts::TrsCounts;
use crate::error::{Error, Result};
use crate::rng::{stream, StreamRng};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitStrategy {
    /// Everyone observed is independent, nobody missed, `P = 1/2`,
    /// `delta = 1`, `alpha_u = 0.1`.
    #[default]
    Default,
    /// Random effects, weights and missed counts drawn from the seed.
    Dispersed,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GibbsConfig {
    pub iterations: usize,
    pub burn_in: usize,
    pub thin: usize,
    pub seed: u64,
    /// `pinned[s]` fixes `alpha_{s+1} = 0`.
    #[serde(default)]
    pub pinned: [bool; 4],
    #[serde(default)]
    pub init: InitStrategy,
}

impl Default for GibbsConfig {
    fn default() -> Self {
        Self {
            iterations: 50_000,
            burn_in: 25_000,
            thin: 10,
            seed: 1,
            pinned: [false; 4],
            init: InitStrategy::Default,
        }
    }
}

impl GibbsConfig {
    pub fn new(iterations: usize, burn_in: usize, thin: usize, seed: u64) -> Self {
        Self {
            iterations,
            burn_in,
            thin,
            seed,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.thin == 0 {
            return Err(Error::InvalidConfig("thin must be at least 1".into()));
        }
        if self.burn_in >= self.iterations {
            return Err(Error::InvalidConfig(format!(
                "burn-in ({}) must be smaller than iterations ({})",
                self.burn_in, self.iterations
            )));
        }
        Ok(())
    }

    pub fn retained(&self) -> usize {
        (self.iterations - self.burn_in) / self.thin
    }

    /// 0-based iteration `t` is kept when it is past burn-in and its
    /// offset is a multiple of `thin`.
    pub fn keeps(&self, t: usize) -> bool {
        t >= self.burn_in && (t - self.burn_in + 1).is_multiple_of(self.thin)
    }
}

/// Complete sampler state.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GibbsState {
    pub population: u64,
    pub alpha: AlphaVector,
    pub delta: DeltaVector,
    pub effects: RandomEffects,
    pub latent: LatentTable,
}

pub fn initialize_state<R: Rng + ?Sized>(
    counts: &TrsCounts,
    pinned: &[bool; 4],
    strategy: InitStrategy,
    rng: &mut R,
) -> GibbsState {
    let pin = |a: [f64; 4]| {
        let mut a = a;
        for (v, p) in a.iter_mut().zip(pinned) {
            if *p {
                *v = 0.0;
            }
        }
        AlphaVector(a)
    };
    match strategy {
        InitStrategy::Default => GibbsState {
            population: counts.x0(),
            alpha: pin([0.1; 4]),
            delta: DeltaVector([1.0; 3]),
            effects: RandomEffects::from_effects([0.0; 3]),
            latent: LatentTable::all_independent(counts),
        },
        InitStrategy::Dispersed => {
            let x0 = counts.x0();
            let mut latent = LatentTable::all_independent(counts);
            for u in 0..4 {
                latent.y[UNOBSERVED][u] = rng.random_range(0..=x0);
            }
            let total = rng.random_range(0.2..0.9);
            let mut w = [0.0; 4];
            for v in &mut w {
                *v = rng.random_range(0.0..1.0);
            }
            let s: f64 = w.iter().sum();
            let alpha = pin(w.map(|v| v / s * total));
            let b = [0; 3].map(|_| rng.random_range(-3.0..3.0));
            let delta = [0; 3].map(|_| rng.random_range(0.3..3.0));
            GibbsState {
                population: latent.population_size(),
                alpha,
                delta: DeltaVector(delta),
                effects: RandomEffects::from_effects(b),
                latent,
            }
        }
    }
}

/// One retained draw.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Draw {
    pub population: u64,
    pub alpha: [f64; 4],
    pub delta: [f64; 3],
    pub b: [f64; 3],
    pub p: [f64; 3],
}

/// Retained draws plus what produced them.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Chain {
    pub counts: TrsCounts,
    pub prior: Prior,
    pub config: GibbsConfig,
    pub draws: Vec<Draw>,
}

pub const SERIES_NAMES: [&str; 11] = [
    "N", "alpha1", "alpha2", "alpha3", "alpha4", "delta1", "delta2", "delta3", "P1", "P2", "P3",
];

impl Chain {
    pub fn len(&self) -> usize {
        self.draws.len()
    }

    pub fn is_empty(&self) -> bool {
        self.draws.is_empty()
    }

    pub fn population(&self) -> Vec<f64> {
        self.draws.iter().map(|d| d.population as f64).collect()
    }

    /// A scalar series by name: `N`, `alpha1..4`, `delta1..3`, `b1..3`, `P1..3`.
    pub fn series(&self, name: &str) -> Result<Vec<f64>> {
        let idx = |prefix: &str, max: usize| -> Option<usize> {
            let i: usize = name.strip_prefix(prefix)?.parse().ok()?;
            (1..=max).contains(&i).then_some(i - 1)
        };
        let pick: Box<dyn Fn(&Draw) -> f64> = if name == "N" {
            Box::new(|d| d.population as f64)
        } else if let Some(i) = idx("alpha", 4) {
            Box::new(move |d| d.alpha[i])
        } else if let Some(i) = idx("delta", 3) {
            Box::new(move |d| d.delta[i])
        } else if let Some(i) = idx("b", 3) {
            Box::new(move |d| d.b[i])
        } else if let Some(i) = idx("P", 3) {
            Box::new(move |d| d.p[i])
        } else {
            return Err(Error::InvalidParameter(format!("unknown chain series `{name}`")));
        };
        Ok(self.draws.iter().map(pick).collect())
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(SERIES_NAMES).map_err(csv_err)?;
        for d in &self.draws {
            let mut row = vec![d.population.to_string()];
            row.extend(d.alpha.iter().chain(&d.delta).chain(&d.p).map(|v| v.to_string()));
            w.write_record(&row).map_err(csv_err)?;
        }
        w.flush()?;
        Ok(())
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

/// Stateful sampler; [`run_gibbs`] is the usual entry point.
pub struct GibbsSampler<'a> {
    counts: &'a TrsCounts,
    prior: &'a Prior,
    pinned: [bool; 4],
    state: GibbsState,
    rng: StreamRng,
}

impl<'a> GibbsSampler<'a> {
    pub fn new(counts: &'a TrsCounts, prior: &'a Prior, config: &GibbsConfig) -> Result<Self> {
        prior.validate()?;
        let mut rng = stream(config.seed, 0);
        let state = initialize_state(counts, &config.pinned, config.init, &mut rng);
        Ok(Self {
            counts,
            prior,
            pinned: config.pinned,
            state,
            rng,
        })
    }

    pub fn state(&self) -> &GibbsState {
        &self.state
    }

    /// One sweep: weights, shapes, population size, latent split, effects.
    pub fn step(&mut self) -> Result<()> {
        let s = &mut self.state;
        let rng = &mut self.rng;
        s.alpha = sample_alpha(rng, &s.latent, self.prior, &self.pinned)?;
        s.delta = sample_delta(rng, &s.effects, self.prior)?;
        s.population = sample_population_size(rng, &mut s.latent, &s.alpha, &s.effects)?;
        let missed = s.population - self.counts.x0();
        s.latent = sample_latent(rng, self.counts, missed, &s.alpha, &s.effects)?;
        s.effects = sample_effects(rng, &s.latent, &s.delta)?;
        debug_assert_eq!(s.latent.population_size(), s.population);
        Ok(())
    }

    pub fn draw(&self) -> Draw {
        let s = &self.state;
        Draw {
            population: s.population,
            alpha: s.alpha.0,
            delta: s.delta.0,
            b: s.effects.b,
            p: s.effects.p,
        }
    }
}

/// Runs the sampler; the chain is a pure function of the inputs.
pub fn run_gibbs(counts: &TrsCounts, prior: &Prior, config: &GibbsConfig) -> Result<Chain> {
    config.validate()?;
    let mut sampler = GibbsSampler::new(counts, prior, config)?;
    let mut draws = Vec::with_capacity(config.retained());
    for t in 0..config.iterations {
        sampler.step()?;
        if config.keeps(t) {
            draws.push(sampler.draw());
        }
    }
    debug_assert_eq!(draws.len(), config.retained());
    Ok(Chain {
        counts: *counts,
        prior: prior.clone(),
        config: config.clone(),
        draws,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ld() -> TrsCounts {
        TrsCounts::new([155, 31, 131, 45, 56, 30, 332]).unwrap()
    }

    #[test]
    fn retained_count() {
        let cfg = GibbsConfig::new(1000, 100, 10, 1);
        assert_eq!(cfg.retained(), 90);
        assert_eq!((0..1000).filter(|t| cfg.keeps(*t)).count(), 90);
        let cfg = GibbsConfig::new(1005, 100, 10, 1);
        assert_eq!((0..1005).filter(|t| cfg.keeps(*t)).count(), cfg.retained());
    }

    #[test]
    fn invalid_configs() {
        assert!(GibbsConfig::new(100, 100, 1, 1).validate().is_err());
        assert!(GibbsConfig::new(100, 10, 0, 1).validate().is_err());
    }

    #[test]
    fn chain_is_deterministic() {
        let cfg = GibbsConfig::new(600, 100, 5, 99);
        let a = run_gibbs(&ld(), &Prior::Jeffreys, &cfg).unwrap();
        let b = run_gibbs(&ld(), &Prior::Jeffreys, &cfg).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 100);
        assert!(a.draws.iter().all(|d| d.population >= 780));
    }

    #[test]
    fn series_lookup() {
        let cfg = GibbsConfig::new(50, 10, 1, 3);
        let chain = run_gibbs(&ld(), &Prior::Jeffreys, &cfg).unwrap();
        assert_eq!(chain.series("alpha4").unwrap().len(), 40);
        assert!(chain.series("alpha5").is_err());
        assert!(chain.series("Q1").is_err());
        let mut buf = Vec::new();
        chain.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("N,alpha1"));
        assert_eq!(text.lines().count(), 41);
    }

    #[test]
    fn dispersed_init_is_valid() {
        let mut rng = stream(11, 0);
        let s = initialize_state(&ld(), &[false, true, false, false], InitStrategy::Dispersed, &mut rng);
        assert!(s.latent.matches(&ld()));
        assert_eq!(s.alpha.0[1], 0.0);
        assert!(s.alpha.validate().is_ok());
        assert_eq!(s.population, s.latent.population_size());
    }
}
