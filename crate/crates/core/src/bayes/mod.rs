//! Probability machinery for the hierarchical count model: log-densities,
//! the exact Dirichlet-Multinomial conjugate update, and the
//! negative-binomial hierarchical model with its analytic gradient.

mod conjugate;
mod dist;
mod model;

pub use conjugate::{dirichlet_multinomial_posterior, DirichletMultinomialTarget};
pub use dist::{
    log_beta_pdf, log_binomial_pmf, log_dirichlet_pdf, log_half_normal_pdf, log_multinomial_pmf,
    log_negbinom_pmf, log_normal_pdf, BetaParams, DirichletParams,
};
pub use model::{
    fold_to_pseudocounts, model_gradient, model_log_posterior, CountData, ModelParams,
    NbModelNoncentered, NbModelTarget, PriorConfig,
};

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum BayesError {
    #[error("parameter outside its domain or dimension mismatch")]
    DomainError,
    #[error("log-posterior evaluated to a non-finite value")]
    NonFinite,
    #[error("no metadata for sample `{0}`")]
    MissingSample(String),
}
