//! Split R-hat and autocorrelation-based effective sample size.

use super::HmcError;
use crate::num::Real;

fn mean<T: Real>(xs: &[T]) -> T {
    xs.iter().copied().sum::<T>() / T::from_count(xs.len())
}

fn sample_variance<T: Real>(xs: &[T]) -> T {
    let m = mean(xs);
    xs.iter().map(|&x| (x - m) * (x - m)).sum::<T>() / T::from_count(xs.len() - 1)
}

/// Halve every chain, dropping the middle draw of odd-length chains, after
/// truncating all chains to the shortest length.
fn split_halves<T: Real>(chains: &[Vec<T>]) -> Result<Vec<Vec<T>>, HmcError> {
    let n = chains.iter().map(|c| c.len()).min().unwrap_or(0);
    if n < 4 {
        return Err(HmcError::InsufficientDraws);
    }
    let half = n / 2;
    let mut out = Vec::with_capacity(chains.len() * 2);
    for c in chains {
        out.push(c[..half].to_vec());
        out.push(c[n - half..n].to_vec());
    }
    Ok(out)
}

/// Split-chain potential scale reduction factor for one parameter.
///
/// Returns infinity when the within-chain variance vanishes while the
/// chains disagree; identical constant chains are an error.
pub fn split_rhat<T: Real>(chains: &[Vec<T>]) -> Result<T, HmcError> {
    if chains.is_empty() {
        return Err(HmcError::InsufficientDraws);
    }
    let split = split_halves(chains)?;
    let m = split.len();
    let n = T::from_count(split[0].len());
    let chain_means: Vec<T> = split.iter().map(|c| mean(c)).collect();
    let within = mean(&split.iter().map(|c| sample_variance(c)).collect::<Vec<T>>());
    let between_over_n = sample_variance(&chain_means); // B / n
    if within <= T::zero() {
        return if between_over_n > T::zero() {
            Ok(T::infinity())
        } else {
            Err(HmcError::InsufficientDraws)
        };
    }
    let var_plus = (n - T::one()) / n * within + between_over_n;
    let _ = m;
    Ok((var_plus / within).sqrt())
}

/// Autocovariance at `lag` with the biased 1/n normalization.
fn autocovariance<T: Real>(xs: &[T], lag: usize) -> T {
    let n = xs.len();
    let m = mean(xs);
    let mut acc = T::zero();
    for i in 0..(n - lag) {
        acc += (xs[i] - m) * (xs[i + lag] - m);
    }
    acc / T::from_count(n)
}

/// Effective sample size across chains for one parameter, using combined
/// autocorrelations with Geyer's initial monotone positive sequence.
/// Clipped to the total draw count; zero for degenerate constant chains.
pub fn effective_sample_size<T: Real>(chains: &[Vec<T>]) -> Result<T, HmcError> {
    if chains.is_empty() {
        return Err(HmcError::InsufficientDraws);
    }
    let split = split_halves(chains)?;
    let m = split.len();
    let n = split[0].len();
    let total = T::from_count(m * n);

    let within = mean(&split.iter().map(|c| sample_variance(c)).collect::<Vec<T>>());
    let chain_means: Vec<T> = split.iter().map(|c| mean(c)).collect();
    let between_over_n = if m > 1 {
        sample_variance(&chain_means)
    } else {
        T::zero()
    };
    let nf = T::from_count(n);
    let var_plus = (nf - T::one()) / nf * within + between_over_n;
    if var_plus <= T::zero() {
        return Ok(T::zero());
    }

    let acov: Vec<Vec<T>> = split
        .iter()
        .map(|c| (0..n).map(|t| autocovariance(c, t)).collect())
        .collect();
    let mean_acov = |t: usize| -> T {
        acov.iter().map(|a| a[t]).sum::<T>() / T::from_count(m)
    };

    // paired sums, kept positive and monotone non-increasing
    let mut rho_sum = T::zero();
    let mut prev_pair = T::infinity();
    let mut t = 1;
    while t + 1 < n {
        let rho_even = T::one() - (within - mean_acov(t)) / var_plus;
        let rho_odd = T::one() - (within - mean_acov(t + 1)) / var_plus;
        let pair = rho_even + rho_odd;
        if pair <= T::zero() {
            break;
        }
        let pair = pair.min(prev_pair);
        prev_pair = pair;
        rho_sum += pair;
        t += 2;
    }
    let tau = T::one() + T::c(2.0) * rho_sum;
    Ok((total / tau).min(total))
}
