//! Factor-graph network inference: Gaussian-mixture discretization of
//! expression into logical states, sum-product loopy belief propagation
//! for the per-gene state marginals, an exact enumeration oracle, and the
//! marginal-vs-observed evaluation metric.

mod exact;
mod gmm;
mod graph;
mod infer;
mod lbp;

pub use exact::brute_force_marginals;
pub use gmm::{fit_gmm, responsibilities, EmConfig, Gmm};
pub use graph::{build_factor_graph, state_spin, FactorGraph, PairwiseFactor, Variable};
pub use infer::{discretize_and_infer, evaluate_marginals, FgnResult, GmmUpdate, InferConfig};
pub use lbp::{run_lbp, ConvergenceTrace, LbpConfig, Marginals, TraceRow};

use thiserror::Error;

use crate::preprocess::PreprocessError;

#[derive(Debug, Error, PartialEq)]
pub enum FgnError {
    #[error("fewer distinct values than mixture components")]
    DegenerateInput,
    #[error("at least 2 mixture components required")]
    BadComponentCount,
    #[error("no evidence for gene `{0}`")]
    MissingEvidence(String),
    #[error("joint state space exceeds the enumeration limit")]
    TooLarge,
    #[error("marginal sets do not cover the same variables and states")]
    VariableMismatch,
    #[error("network node `{0}` not present in the matrix")]
    NodeNotInMatrix(String),
    #[error("invalid factor graph: {0}")]
    InvalidGraph(String),
    #[error(transparent)]
    Preprocess(#[from] PreprocessError),
}
