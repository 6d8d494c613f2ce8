//! Hamiltonian Monte Carlo: leapfrog integration, dual-averaging step-size
//! adaptation, multi-chain sampling, split R-hat / ESS diagnostics and
//! posterior summarization.

mod diagnostics;
mod integrate;
mod sample;
mod summary;

pub use diagnostics::{effective_sample_size, split_rhat};
pub use integrate::leapfrog;
pub use sample::{hmc_sample, hmc_sample_par, ChainResult, HmcConfig};
pub use summary::{summarize, PosteriorSummary, SummaryRow};

use thiserror::Error;

use crate::num::Real;

#[derive(Debug, Error, PartialEq)]
pub enum HmcError {
    #[error("log-posterior is not finite at the initial point")]
    BadInit,
    #[error("non-finite gradient encountered during integration")]
    Divergent,
    #[error("not enough draws for this diagnostic")]
    InsufficientDraws,
    #[error("no chains or no draws to summarize")]
    EmptyChains,
    #[error("parameter name count does not match the draw dimension")]
    NameMismatch,
    #[error("invalid sampler configuration: {0}")]
    BadConfig(&'static str),
}

/// A differentiable unnormalized log-posterior the sampler can draw from.
///
/// Implementations must be pure: chains evaluate them concurrently.
pub trait HmcTarget<T: Real>: Sync {
    fn dim(&self) -> usize;

    /// Unnormalized log density on the unconstrained scale. Non-finite
    /// values mark forbidden regions and reject the proposal.
    fn log_posterior(&self, position: &[T]) -> T;

    fn gradient(&self, position: &[T]) -> Vec<T>;

    /// Map an unconstrained position to the reporting scale (for example
    /// exponentiating log-scale coordinates). Identity by default.
    fn constrain(&self, position: &[T]) -> Vec<T> {
        position.to_vec()
    }
}

/// Standard normal in `dim` dimensions; the calibration benchmark target.
pub struct StandardNormalTarget {
    pub dim: usize,
}

impl<T: Real> HmcTarget<T> for StandardNormalTarget {
    fn dim(&self) -> usize {
        self.dim
    }

    fn log_posterior(&self, position: &[T]) -> T {
        -position.iter().map(|&q| q * q).sum::<T>() * T::c(0.5)
    }

    fn gradient(&self, position: &[T]) -> Vec<T> {
        position.iter().map(|&q| -q).collect()
    }
}
