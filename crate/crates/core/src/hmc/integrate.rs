//! Leapfrog integrator for Hamiltonian dynamics with identity mass matrix.

use super::HmcError;
use crate::num::Real;

/// Integrate `steps` leapfrog steps of size `eps` under the Hamiltonian
/// `H = -logpost(q) + |p|^2 / 2`, where `grad` returns the gradient of the
/// log-posterior. Returns the final position and momentum.
pub fn leapfrog<T: Real>(
    position: &[T],
    momentum: &[T],
    grad: impl Fn(&[T]) -> Vec<T>,
    eps: T,
    steps: usize,
) -> Result<(Vec<T>, Vec<T>), HmcError> {
    let ones = vec![T::one(); position.len()];
    leapfrog_diag_mass(position, momentum, grad, eps, steps, &ones)
}

/// Leapfrog under a diagonal mass matrix: kinetic energy
/// `sum(p_i^2 * inv_mass_i) / 2`, position steps scaled by `inv_mass`.
pub(crate) fn leapfrog_diag_mass<T: Real>(
    position: &[T],
    momentum: &[T],
    grad: impl Fn(&[T]) -> Vec<T>,
    eps: T,
    steps: usize,
    inv_mass: &[T],
) -> Result<(Vec<T>, Vec<T>), HmcError> {
    let mut q = position.to_vec();
    let mut p = momentum.to_vec();
    let half = eps * T::c(0.5);

    let g = checked_grad(&grad, &q)?;
    for (pi, gi) in p.iter_mut().zip(&g) {
        *pi += half * *gi;
    }
    for step in 0..steps {
        for ((qi, pi), im) in q.iter_mut().zip(&p).zip(inv_mass) {
            *qi += eps * *pi * *im;
        }
        let g = checked_grad(&grad, &q)?;
        let factor = if step + 1 == steps { half } else { eps };
        for (pi, gi) in p.iter_mut().zip(&g) {
            *pi += factor * *gi;
        }
    }
    Ok((q, p))
}

fn checked_grad<T: Real>(
    grad: &impl Fn(&[T]) -> Vec<T>,
    q: &[T],
) -> Result<Vec<T>, HmcError> {
    let g = grad(q);
    if g.iter().all(|v| v.is_finite()) {
        Ok(g)
    } else {
        Err(HmcError::Divergent)
    }
}
