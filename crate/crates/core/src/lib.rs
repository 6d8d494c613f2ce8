//! Probabilistic graphical models for gene-expression data.
//!
//! The pipeline goes from raw fold-change tables to posterior inference in
//! three stages:
//!
//! 1. [`ingest`] / [`preprocess`] — parse fold-change, gene-set and edge-list
//!    files, filter significant genes, cluster them and build a Pearson
//!    co-expression network.
//! 2. [`fgn`] — discretize expression into logical states with a Gaussian
//!    mixture and estimate per-gene state marginals with loopy belief
//!    propagation on a factor graph.
//! 3. [`bayes`] / [`hmc`] — a hierarchical negative-binomial count model with
//!    analytic gradients, sampled with Hamiltonian Monte Carlo, summarized
//!    with split R-hat and effective-sample-size diagnostics.
//!
//! [`report`] writes every result as a stable machine-readable file.
//!
//! All numeric kernels are generic over the scalar type through the [`Real`]
//! trait; `f64` aliases for the common pipeline path live at the crate root.

pub mod bayes;
pub mod fgn;
pub mod hmc;
pub mod ingest;
pub mod num;
pub mod preprocess;
pub mod report;
pub mod special;

pub use num::Real;

/// `f64` aliases for the standard pipeline path.
pub type ExpressionMatrix64 = ingest::ExpressionMatrix<f64>;
pub type EdgeList64 = ingest::EdgeList<f64>;
pub type CoexpressionNetwork64 = preprocess::CoexpressionNetwork<f64>;
pub type Dendrogram64 = preprocess::Dendrogram<f64>;
pub type Gmm64 = fgn::Gmm<f64>;
pub type FactorGraph64 = fgn::FactorGraph<f64>;
pub type Marginals64 = fgn::Marginals<f64>;
pub type ModelParams64 = bayes::ModelParams<f64>;
pub type HmcConfig64 = hmc::HmcConfig<f64>;
pub type PosteriorSummary64 = hmc::PosteriorSummary<f64>;
