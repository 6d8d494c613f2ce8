//! One-dimensional Gaussian mixture fitting by expectation-maximization.
//!
//! The fitted mixture discretizes continuous expression into K logical
//! states: component index = state index after sorting components by mean,
//! so state 0 is the lowest expression level.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use super::FgnError;
use crate::num::Real;

/// Gaussian mixture with components sorted ascending by mean.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Gmm<T: Real> {
    pub weights: Vec<T>,
    pub means: Vec<T>,
    pub variances: Vec<T>,
}

/// EM settings. The seed only breaks exact quantile ties during
/// initialization, keeping fits fully reproducible.
#[derive(Debug, Clone, PartialEq)]
pub struct EmConfig<T: Real> {
    pub max_iter: usize,
    pub tol: T,
    pub seed: u64,
    pub variance_floor: T,
}

impl<T: Real> Default for EmConfig<T> {
    fn default() -> Self {
        EmConfig {
            max_iter: 500,
            tol: T::c(1e-8),
            seed: 0,
            variance_floor: T::c(1e-6),
        }
    }
}

impl<T: Real> Gmm<T> {
    pub fn n_components(&self) -> usize {
        self.means.len()
    }

    /// Log joint density `ln(w_k * N(v; mu_k, var_k))` per component.
    fn log_joint(&self, value: T) -> Vec<T> {
        let half = T::c(0.5);
        let ln_two_pi = T::c((2.0 * std::f64::consts::PI).ln());
        (0..self.n_components())
            .map(|k| {
                let d = value - self.means[k];
                self.weights[k].ln() - half * (ln_two_pi + self.variances[k].ln())
                    - d * d / (T::c(2.0) * self.variances[k])
            })
            .collect()
    }

    /// Mixture log density at one point.
    pub fn log_density(&self, value: T) -> T {
        log_sum_exp(&self.log_joint(value))
    }

    /// Smallest gap between adjacent component means in pooled-sd units;
    /// low scores mean the states are poorly separated.
    pub fn separation_score(&self) -> T {
        let mut worst = T::infinity();
        for k in 1..self.n_components() {
            let spread = self.variances[k - 1].sqrt() + self.variances[k].sqrt();
            let gap = (self.means[k] - self.means[k - 1]).abs() / spread;
            worst = worst.min(gap);
        }
        worst
    }
}

fn log_sum_exp<T: Real>(xs: &[T]) -> T {
    let m = xs.iter().copied().fold(T::neg_infinity(), T::max);
    if !m.is_finite() {
        return m;
    }
    let s = xs.iter().map(|&x| (x - m).exp()).sum::<T>();
    m + s.ln()
}

/// Posterior component-membership probabilities of a value under the
/// mixture. Sums to one.
pub fn responsibilities<T: Real>(gmm: &Gmm<T>, value: T) -> Vec<T> {
    let lj = gmm.log_joint(value);
    let lse = log_sum_exp(&lj);
    lj.iter().map(|&l| (l - lse).exp()).collect()
}

/// Fit a K-component mixture by EM, initialized on data quantiles.
///
/// Returns the fitted mixture together with the per-iteration log-likelihood
/// trace (non-decreasing up to float round-off). Stops once the gain drops
/// below `cfg.tol` or `cfg.max_iter` is reached; components come back sorted
/// ascending by mean.
pub fn fit_gmm<T: Real>(
    values: &[T],
    k: usize,
    cfg: &EmConfig<T>,
) -> Result<(Gmm<T>, Vec<T>), FgnError> {
    if k < 2 {
        return Err(FgnError::BadComponentCount);
    }
    if values.len() < k || values.iter().any(|v| !v.is_finite()) {
        return Err(FgnError::DegenerateInput);
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite values"));
    sorted.dedup_by(|a, b| a == b);
    if sorted.len() < k {
        return Err(FgnError::DegenerateInput);
    }

    let n = values.len();
    let nf = T::from_count(n);
    let mean = values.iter().copied().sum::<T>() / nf;
    let var = values
        .iter()
        .map(|&v| (v - mean) * (v - mean))
        .sum::<T>()
        / nf;
    let var = var.max(cfg.variance_floor);

    // quantile seeding; seeded jitter only if quantiles collide
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut ordered = values.to_vec();
    ordered.sort_by(|a, b| a.partial_cmp(b).expect("finite values"));
    let mut means: Vec<T> = (0..k)
        .map(|j| {
            let q = (T::from_count(j) + T::c(0.5)) / T::from_count(k);
            let pos = q * T::from_count(n - 1);
            let lo = pos.floor().to_usize().expect("index in range");
            let frac = pos - pos.floor();
            let hi = (lo + 1).min(n - 1);
            ordered[lo] * (T::one() - frac) + ordered[hi] * frac
        })
        .collect();
    for j in 1..k {
        if means[j] <= means[j - 1] {
            let jitter = T::c(rng.random::<f64>() * 1e-3 + 1e-6) * var.sqrt();
            means[j] = means[j - 1] + jitter;
        }
    }
    let mut gmm = Gmm {
        weights: vec![T::one() / T::from_count(k); k],
        means,
        variances: vec![var / T::from_count(k * k); k],
    };
    for v in &mut gmm.variances {
        *v = v.max(cfg.variance_floor);
    }

    let mut ll_trace = Vec::new();
    let mut resp = vec![T::zero(); n * k];
    let mut prev_ll = T::neg_infinity();
    for _ in 0..cfg.max_iter {
        // E step
        let mut ll = T::zero();
        for (i, &v) in values.iter().enumerate() {
            let lj = gmm.log_joint(v);
            let lse = log_sum_exp(&lj);
            ll += lse;
            for (j, &l) in lj.iter().enumerate() {
                resp[i * k + j] = (l - lse).exp();
            }
        }
        ll_trace.push(ll);

        // M step
        for j in 0..k {
            let nk = (0..n).map(|i| resp[i * k + j]).sum::<T>();
            if nk <= T::c(1e-12) {
                // collapsed component: keep its parameters, shrink its weight
                gmm.weights[j] = T::c(1e-12);
                continue;
            }
            let mu = (0..n).map(|i| resp[i * k + j] * values[i]).sum::<T>() / nk;
            let v2 = (0..n)
                .map(|i| {
                    let d = values[i] - mu;
                    resp[i * k + j] * d * d
                })
                .sum::<T>()
                / nk;
            gmm.weights[j] = nk / nf;
            gmm.means[j] = mu;
            gmm.variances[j] = v2.max(cfg.variance_floor);
        }
        let wsum = gmm.weights.iter().copied().sum::<T>();
        for w in &mut gmm.weights {
            *w /= wsum;
        }

        if ll - prev_ll < cfg.tol && prev_ll.is_finite() {
            break;
        }
        prev_ll = ll;
    }

    // relabel so component index equals state index
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| gmm.means[a].partial_cmp(&gmm.means[b]).expect("finite"));
    let gmm = Gmm {
        weights: order.iter().map(|&i| gmm.weights[i]).collect(),
        means: order.iter().map(|&i| gmm.means[i]).collect(),
        variances: order.iter().map(|&i| gmm.variances[i]).collect(),
    };
    Ok((gmm, ll_trace))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand_distr::{Distribution, Normal};

    /// 100 draws near -1 and 100 near +1, sd 0.05, fixed seed.
    fn two_mode_sample(seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let lo = Normal::new(-1.0, 0.05).unwrap();
        let hi = Normal::new(1.0, 0.05).unwrap();
        let mut vals: Vec<f64> = (0..100).map(|_| lo.sample(&mut rng)).collect();
        vals.extend((0..100).map(|_| hi.sample(&mut rng)));
        vals
    }

    #[test]
    fn recovers_generating_means() {
        let values = two_mode_sample(42);
        let (gmm, _) = fit_gmm(&values, 2, &EmConfig::default()).unwrap();
        assert!((gmm.means[0] + 1.0).abs() < 0.03, "mean0 = {}", gmm.means[0]);
        assert!((gmm.means[1] - 1.0).abs() < 0.03, "mean1 = {}", gmm.means[1]);
        assert!((gmm.weights[0] - 0.5).abs() < 0.05);
        assert!((gmm.weights[1] - 0.5).abs() < 0.05);
    }

    #[test]
    fn log_likelihood_never_decreases() {
        let values = two_mode_sample(7);
        let (_, trace) = fit_gmm(&values, 2, &EmConfig::default()).unwrap();
        assert!(trace.len() >= 2);
        for w in trace.windows(2) {
            assert!(w[1] >= w[0] - 1e-10, "ll dropped: {} -> {}", w[0], w[1]);
        }
    }

    #[test]
    fn constant_input_is_degenerate() {
        assert_eq!(
            fit_gmm(&[2.0f64; 50], 2, &EmConfig::default()).unwrap_err(),
            FgnError::DegenerateInput
        );
        assert_eq!(
            fit_gmm(&[1.0f64, 2.0], 3, &EmConfig::default()).unwrap_err(),
            FgnError::DegenerateInput
        );
    }

    #[test]
    fn symmetric_data_gives_balanced_weights() {
        let mut values: Vec<f64> = Vec::new();
        for i in 0..60 {
            let a = 1.0 + (i as f64) * 0.01;
            values.push(a);
            values.push(-a);
        }
        let (gmm, _) = fit_gmm(&values, 2, &EmConfig::default()).unwrap();
        assert!((gmm.weights[0] - 0.5).abs() < 1e-6);
        assert!((gmm.weights[1] - 0.5).abs() < 1e-6);
        assert!(gmm.means[0] < gmm.means[1]);
    }

    #[test]
    fn responsibilities_sum_to_one_and_follow_density() {
        let values = two_mode_sample(3);
        let (gmm, _) = fit_gmm(&values, 2, &EmConfig::default()).unwrap();
        // at the component-1 mean of a well-separated mixture
        let r = responsibilities(&gmm, gmm.means[1]);
        assert!((r.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(r[1] > 0.99, "r = {r:?}");
        // far in the upper tail the top component dominates
        let r = responsibilities(&gmm, 10.0);
        assert!(r[1] > 1.0 - 1e-9);
    }

    #[test]
    fn huge_finite_value_goes_to_highest_mean_component() {
        // equal variances, so tail dominance follows the means
        let gmm: Gmm<f64> = Gmm {
            weights: vec![0.5, 0.5],
            means: vec![-1.0, 1.0],
            variances: vec![0.0025, 0.0025],
        };
        let r = responsibilities(&gmm, 1e12);
        assert!((r[1] - 1.0).abs() < 1e-12);
        assert!(r.iter().all(|p| p.is_finite()));
    }

    #[test]
    fn midpoint_of_symmetric_mixture_splits_evenly() {
        let gmm: Gmm<f64> = Gmm {
            weights: vec![0.5, 0.5],
            means: vec![-1.0, 1.0],
            variances: vec![0.25, 0.25],
        };
        let r = responsibilities(&gmm, 0.0);
        assert!((r[0] - 0.5).abs() < 1e-12);
        assert!((r[1] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn variance_floor_is_enforced() {
        // near-duplicate points would otherwise collapse a component
        let values = vec![1.0f64, 1.0 + 1e-13, 1.0 + 2e-13, 5.0, 5.0 + 1e-13, 9.0];
        let (gmm, _) = fit_gmm(&values, 2, &EmConfig::default()).unwrap();
        for v in &gmm.variances {
            assert!(*v >= 1e-6);
        }
    }
}
