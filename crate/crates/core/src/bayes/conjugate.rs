//! Exact Dirichlet-Multinomial conjugate update, and the same model exposed
//! as an unconstrained sampling target so the sampler can be validated
//! against the closed form.

use super::dist::DirichletParams;
use super::BayesError;
use crate::num::Real;

/// Conjugate posterior of a Dirichlet prior after observing multinomial
/// counts: `Dirichlet(alpha + k)`.
pub fn dirichlet_multinomial_posterior<T: Real>(
    prior: &DirichletParams<T>,
    counts: &[u64],
) -> Result<DirichletParams<T>, BayesError> {
    if counts.len() != prior.len() {
        return Err(BayesError::DomainError);
    }
    let alpha = prior
        .alpha
        .iter()
        .zip(counts)
        .map(|(&a, &k)| a + T::from_u64(k).expect("count fits scalar"))
        .collect();
    DirichletParams::new(alpha)
}

/// The Dirichlet-Multinomial posterior over the probability simplex,
/// reparameterized to unconstrained space by the additive log-ratio map
/// `theta_i = exp(z_i) / (1 + sum_j exp(z_j))` (last coordinate pinned).
///
/// Log density in z-space is `sum_i (alpha_i + k_i) ln theta_i(z)` up to a
/// constant; the `+1` from the Jacobian `prod_i theta_i` is already folded
/// in through the posterior exponents.
#[derive(Debug, Clone)]
pub struct DirichletMultinomialTarget<T: Real> {
    /// posterior concentration alpha + k
    posterior: Vec<T>,
}

impl<T: Real> DirichletMultinomialTarget<T> {
    pub fn new(
        prior: &DirichletParams<T>,
        counts: &[u64],
    ) -> Result<Self, BayesError> {
        let posterior = dirichlet_multinomial_posterior(prior, counts)?;
        Ok(DirichletMultinomialTarget {
            posterior: posterior.alpha,
        })
    }

    /// number of unconstrained coordinates (categories - 1)
    pub fn dim(&self) -> usize {
        self.posterior.len() - 1
    }

    /// Map an unconstrained point to the simplex.
    pub fn to_simplex(&self, z: &[T]) -> Vec<T> {
        let mut exps: Vec<T> = z.iter().map(|&v| v.exp()).collect();
        exps.push(T::one());
        let s = exps.iter().copied().sum::<T>();
        exps.into_iter().map(|e| e / s).collect()
    }

    /// Unnormalized log posterior in z-space, Jacobian included.
    pub fn log_posterior(&self, z: &[T]) -> T {
        let theta = self.to_simplex(z);
        // exponents alpha_i + k_i - 1 from the density plus 1 from the
        // Jacobian: sum_i (alpha_i + k_i) ln theta_i
        self.posterior
            .iter()
            .zip(&theta)
            .map(|(&c, &t)| c * t.ln())
            .sum()
    }

    /// Analytic z-space gradient: `c_j - theta_j * sum(c)`.
    pub fn gradient(&self, z: &[T]) -> Vec<T> {
        let theta = self.to_simplex(z);
        let total = self.posterior.iter().copied().sum::<T>();
        (0..self.dim())
            .map(|j| self.posterior[j] - theta[j] * total)
            .collect()
    }
}
