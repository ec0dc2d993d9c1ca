//! Bivariate directed-acyclic-graph autoregressive (BDAGAR) models for joint
//! mapping of two diseases over an areal region graph.
//!
//! The crate is organised bottom-up:
//!
//! - [`graph`]: ordered region graphs, neighbor sets, adjacency.
//! - [`precision`]: univariate DAGAR and proper-CAR precision matrices, GMRF
//!   densities and sampling.
//! - [`bivariate`]: linking matrix, joint precision/covariance, per-region
//!   cross-disease correlation.
//! - [`inference`]: Gibbs/Metropolis sampler, posterior summaries, ESS.
//! - [`waic`]: pointwise log-likelihoods, WAIC, model comparison tables.
//! - [`io`]: datasets, simulation, configuration, exports.
//! - [`cli`]: the `bdagar` command-line front end.

pub mod bivariate;
pub mod cli;
pub mod error;
pub mod graph;
pub mod inference;
pub mod io;
pub mod linalg;
pub mod precision;
pub mod waic;

pub use error::{Error, Result};
