//! Log-densities of the distributions used by the hierarchical model:
//! Beta, Dirichlet, Binomial, Multinomial, Negative Binomial, Normal and
//! Half-Normal.

use super::BayesError;
use crate::num::Real;
use crate::special::{ln_beta, ln_choose, ln_factorial, ln_gamma};

const LN_TWO_PI: f64 = 1.837_877_066_409_345_4;

/// Beta(a, b) shape parameters, both strictly positive.
#[derive(Debug, Clone, PartialEq)]
pub struct BetaParams<T: Real> {
    pub a: T,
    pub b: T,
}

impl<T: Real> BetaParams<T> {
    pub fn new(a: T, b: T) -> Result<Self, BayesError> {
        if a > T::zero() && b > T::zero() && a.is_finite() && b.is_finite() {
            Ok(BetaParams { a, b })
        } else {
            Err(BayesError::DomainError)
        }
    }
}

/// Dirichlet concentration vector: length >= 2, all entries positive.
#[derive(Debug, Clone, PartialEq)]
pub struct DirichletParams<T: Real> {
    pub alpha: Vec<T>,
}

impl<T: Real> DirichletParams<T> {
    pub fn new(alpha: Vec<T>) -> Result<Self, BayesError> {
        if alpha.len() >= 2 && alpha.iter().all(|a| *a > T::zero() && a.is_finite()) {
            Ok(DirichletParams { alpha })
        } else {
            Err(BayesError::DomainError)
        }
    }

    pub fn len(&self) -> usize {
        self.alpha.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alpha.is_empty()
    }

    /// Mean vector alpha_i / sum(alpha).
    pub fn mean(&self) -> Vec<T> {
        let s = self.alpha.iter().copied().sum::<T>();
        self.alpha.iter().map(|&a| a / s).collect()
    }
}

fn on_simplex<T: Real>(theta: &[T]) -> bool {
    theta.iter().all(|&t| t >= T::zero() && t.is_finite())
        && (theta.iter().copied().sum::<T>() - T::one()).abs() < T::c(1e-9)
}

/// Log Beta density at `theta` in (0, 1).
pub fn log_beta_pdf<T: Real>(theta: T, p: &BetaParams<T>) -> Result<T, BayesError> {
    if !(theta > T::zero() && theta < T::one()) {
        return Err(BayesError::DomainError);
    }
    Ok((p.a - T::one()) * theta.ln() + (p.b - T::one()) * (T::one() - theta).ln()
        - ln_beta(p.a, p.b))
}

/// Log Dirichlet density at a strictly positive simplex point.
pub fn log_dirichlet_pdf<T: Real>(theta: &[T], p: &DirichletParams<T>) -> Result<T, BayesError> {
    if theta.len() != p.len() || !on_simplex(theta) || theta.iter().any(|&t| t == T::zero()) {
        return Err(BayesError::DomainError);
    }
    let alpha0 = p.alpha.iter().copied().sum::<T>();
    let mut out = ln_gamma(alpha0);
    for (&t, &a) in theta.iter().zip(&p.alpha) {
        out += (a - T::one()) * t.ln() - ln_gamma(a);
    }
    Ok(out)
}

/// Log Binomial pmf; zero-probability edges come back as `-inf`.
pub fn log_binomial_pmf<T: Real>(k: u64, n: u64, theta: T) -> Result<T, BayesError> {
    if k > n || !(theta >= T::zero() && theta <= T::one()) {
        return Err(BayesError::DomainError);
    }
    // certain / impossible events at the closed endpoints
    if theta == T::zero() {
        return Ok(if k == 0 { T::zero() } else { T::neg_infinity() });
    }
    if theta == T::one() {
        return Ok(if k == n { T::zero() } else { T::neg_infinity() });
    }
    let kf = T::from_u64(k).expect("count fits scalar");
    let nf = T::from_u64(n).expect("count fits scalar");
    Ok(ln_choose::<T>(n, k) + kf * theta.ln() + (nf - kf) * (T::one() - theta).ln())
}

/// Log Multinomial pmf with `n = sum(k)`.
pub fn log_multinomial_pmf<T: Real>(k: &[u64], theta: &[T]) -> Result<T, BayesError> {
    if k.len() != theta.len() || k.is_empty() || !on_simplex(theta) {
        return Err(BayesError::DomainError);
    }
    let n: u64 = k.iter().sum();
    let mut out = ln_factorial::<T>(n);
    for (&ki, &ti) in k.iter().zip(theta) {
        if ti == T::zero() {
            if ki > 0 {
                return Ok(T::neg_infinity());
            }
            continue;
        }
        out += T::from_u64(ki).expect("count fits scalar") * ti.ln() - ln_factorial::<T>(ki);
    }
    Ok(out)
}

/// Log Negative Binomial pmf in the mean-dispersion parameterization:
/// mean `mu`, variance `mu + mu^2 / phi`.
pub fn log_negbinom_pmf<T: Real>(k: u64, mu: T, phi: T) -> Result<T, BayesError> {
    if !(mu > T::zero()) || !(phi > T::zero()) || !mu.is_finite() || !phi.is_finite() {
        return Err(BayesError::DomainError);
    }
    let kf = T::from_u64(k).expect("count fits scalar");
    Ok(ln_gamma(kf + phi) - ln_gamma(phi) - ln_factorial::<T>(k)
        + phi * (phi / (phi + mu)).ln()
        + kf * (mu / (phi + mu)).ln())
}

/// Log Normal density.
pub fn log_normal_pdf<T: Real>(x: T, mean: T, sd: T) -> T {
    let z = (x - mean) / sd;
    -sd.ln() - T::c(0.5 * LN_TWO_PI) - z * z * T::c(0.5)
}

/// Log Half-Normal density on `x >= 0` with the given scale.
pub fn log_half_normal_pdf<T: Real>(x: T, scale: T) -> T {
    if x < T::zero() {
        return T::neg_infinity();
    }
    let z = x / scale;
    T::c(2.0f64.ln()) - scale.ln() - T::c(0.5 * LN_TWO_PI) - z * z * T::c(0.5)
}
