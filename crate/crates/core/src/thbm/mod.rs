//! Dependence-mixture model with random list effects, and its Gibbs sampler.

pub mod conditionals;
pub mod gibbs;
pub mod marginal;
pub mod model;
pub mod prior;

pub use conditionals::{
    sample_alpha, sample_delta, sample_dirichlet, sample_effects, sample_latent, sample_multinomial,
    sample_negative_binomial, sample_population_size, LatentTable,
};
pub use gibbs::{initialize_state, run_gibbs, Chain, Draw, GibbsConfig, GibbsSampler, GibbsState, InitStrategy};
pub use marginal::{marginal_loglik_mc, marginal_loglik_with, multinomial_loglik, sample_gl1, McEstimate};
pub use model::{
    cell_probabilities, latent_split_probabilities, logistic, logit, AlphaVector, CellProbabilities, DeltaVector,
    RandomEffects, SplitProbabilities, ALL_PATTERNS, N_CELLS, N_REGIMES, UNOBSERVED,
};
pub use prior::{InformativePrior, Prior};

/// Population size with the weights and shapes that drive it.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ThbmParams {
    pub population: u64,
    pub alpha: AlphaVector,
    pub delta: DeltaVector,
}
