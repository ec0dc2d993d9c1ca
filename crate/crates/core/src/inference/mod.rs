//! Posterior inference for the bivariate spatial regression
//! `y_ij = x_ijᵀβ_i + w_ij + ε_ij`, `ε_ij ~ N(0, σ_i²)`.

mod data;
mod diagnostics;
mod draws;
mod prior;
mod sampler;
mod summary;

pub use data::Dataset;
pub use diagnostics::{effective_sample_size, parameter_ess, EssEstimate};
pub use draws::{Draw, DrawsMeta, PosteriorDraws};
pub use prior::PriorSpec;
pub use sampler::{run_mcmc, ChainState, GaussianConditional, GibbsSampler, McmcConfig, ShapeRate, TARGET_ACCEPTANCE};
pub use summary::{quantile, summarize, summarize_values, ParameterSummary, Summary};
