//! Multi-chain HMC driver with dual-averaging step-size adaptation.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::integrate::leapfrog_diag_mass;
use super::{HmcError, HmcTarget};
use crate::num::Real;

/// Sampler settings shared by all chains.
#[derive(Debug, Clone, PartialEq)]
pub struct HmcConfig<T: Real> {
    /// initial leapfrog step size (adapted during warmup when `adapt`)
    pub step_size: T,
    pub num_leapfrog: usize,
    pub warmup: usize,
    pub samples: usize,
    pub chains: usize,
    pub seed: u64,
    pub target_accept: T,
    pub adapt: bool,
    /// estimate a diagonal mass matrix from the middle warmup window
    pub adapt_mass: bool,
}

impl<T: Real> Default for HmcConfig<T> {
    fn default() -> Self {
        HmcConfig {
            step_size: T::c(0.1),
            num_leapfrog: 32,
            warmup: 1000,
            samples: 1000,
            chains: 4,
            seed: 0,
            target_accept: T::c(0.8),
            adapt: true,
            adapt_mass: false,
        }
    }
}

/// Post-warmup output of one chain, draws on the constrained scale.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainResult<T: Real> {
    pub draws: Vec<Vec<T>>,
    pub accept_rate: T,
    pub divergence_count: usize,
    pub seed_used: u64,
    pub final_step_size: T,
}

impl<T: Real> ChainResult<T> {
    /// One parameter's draws as a column.
    pub fn column(&self, param: usize) -> Vec<T> {
        self.draws.iter().map(|d| d[param]).collect()
    }
}

/// Proposals with |dH| beyond this count as divergences.
const DIVERGENCE_ENERGY: f64 = 1000.0;

/// Dual-averaging state (Hoffman-Gelman constants).
struct DualAveraging<T> {
    mu: T,
    log_eps: T,
    log_eps_bar: T,
    h_bar: T,
    t: usize,
}

impl<T: Real> DualAveraging<T> {
    fn new(eps0: T) -> Self {
        DualAveraging {
            mu: (T::c(10.0) * eps0).ln(),
            log_eps: eps0.ln(),
            log_eps_bar: T::zero(),
            h_bar: T::zero(),
            t: 0,
        }
    }

    fn update(&mut self, accept_prob: T, target: T) {
        self.t += 1;
        let t = T::from_count(self.t);
        let t0 = T::c(10.0);
        let gamma = T::c(0.05);
        let kappa = T::c(-0.75);
        let w = T::one() / (t + t0);
        self.h_bar = (T::one() - w) * self.h_bar + w * (target - accept_prob);
        self.log_eps = self.mu - t.sqrt() / gamma * self.h_bar;
        let eta = t.powf(kappa);
        self.log_eps_bar = eta * self.log_eps + (T::one() - eta) * self.log_eps_bar;
    }

    fn current(&self) -> T {
        self.log_eps.exp()
    }

    fn adapted(&self) -> T {
        self.log_eps_bar.exp()
    }
}

fn run_chain<T: Real, M: HmcTarget<T>>(
    target: &M,
    init: &[T],
    cfg: &HmcConfig<T>,
    chain_index: usize,
) -> Result<ChainResult<T>, HmcError> {
    let seed = cfg.seed.wrapping_add(chain_index as u64);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dim = target.dim();

    // over-dispersed starts: jitter the shared init per chain so the
    // between-chain diagnostics have something to measure
    let mut q: Vec<T> = init
        .iter()
        .map(|&v| v + T::c(0.1 * rng.sample::<f64, _>(StandardNormal)))
        .collect();
    let mut logpost = target.log_posterior(&q);
    if !logpost.is_finite() {
        return Err(HmcError::BadInit);
    }

    let mut eps = cfg.step_size;
    let mut adapt = cfg.adapt.then(|| DualAveraging::new(eps));
    let mut draws = Vec::with_capacity(cfg.samples);
    let mut accepted = 0usize;
    let mut divergences = 0usize;

    // diagonal mass matrix, re-estimated at the end of each warmup window
    let mut inv_mass = vec![T::one(); dim];
    let mass_collect_from = cfg.warmup / 4;
    let mass_updates = [cfg.warmup / 2, cfg.warmup - cfg.warmup / 4];
    let mut mass_samples: Vec<Vec<T>> = Vec::new();
    let kinetic_energy = |p: &[T], inv_mass: &[T]| -> T {
        p.iter()
            .zip(inv_mass)
            .map(|(&x, &im)| x * x * im)
            .sum::<T>()
            * T::c(0.5)
    };

    for iter in 0..(cfg.warmup + cfg.samples) {
        let warming = iter < cfg.warmup;
        let p: Vec<T> = inv_mass
            .iter()
            .map(|&im| T::c(rng.sample::<f64, _>(StandardNormal)) / im.sqrt())
            .collect();
        let kinetic = kinetic_energy(&p, &inv_mass);
        let h0 = -logpost + kinetic;

        let proposal = leapfrog_diag_mass(
            &q,
            &p,
            |x| target.gradient(x),
            eps,
            cfg.num_leapfrog,
            &inv_mass,
        );
        let (accept_prob, divergent, next) = match proposal {
            Ok((q_new, p_new)) => {
                let logpost_new = target.log_posterior(&q_new);
                let kinetic_new = kinetic_energy(&p_new, &inv_mass);
                let h1 = -logpost_new + kinetic_new;
                let dh = h1 - h0;
                if !dh.is_finite() || dh.abs() > T::c(DIVERGENCE_ENERGY) {
                    (T::zero(), true, None)
                } else {
                    let a = (-dh).exp().min(T::one());
                    let u = T::c(rng.random::<f64>());
                    if u < a {
                        (a, false, Some((q_new, logpost_new)))
                    } else {
                        (a, false, None)
                    }
                }
            }
            Err(HmcError::Divergent) => (T::zero(), true, None),
            Err(e) => return Err(e),
        };

        if let Some((q_new, lp_new)) = next {
            q = q_new;
            logpost = lp_new;
            if !warming {
                accepted += 1;
            }
        }
        if divergent && !warming {
            divergences += 1;
        }

        if warming && cfg.adapt_mass {
            if iter >= mass_collect_from {
                mass_samples.push(q.clone());
            }
            if mass_updates.contains(&(iter + 1)) && mass_samples.len() >= 10 {
                let n = T::from_count(mass_samples.len());
                let shrink = n / (n + T::c(5.0));
                for (i, im) in inv_mass.iter_mut().enumerate() {
                    let col: Vec<T> = mass_samples.iter().map(|s| s[i]).collect();
                    let mean = col.iter().copied().sum::<T>() / n;
                    let var = col
                        .iter()
                        .map(|&x| (x - mean) * (x - mean))
                        .sum::<T>()
                        / (n - T::one());
                    // shrink toward a small constant, as regularization
                    let var = shrink * var + (T::one() - shrink) * T::c(1e-3);
                    *im = var.max(T::c(1e-8)).min(T::c(1e8));
                }
                mass_samples = Vec::new();
                // the new metric changes the stable step size; restart the
                // averaging around the current value
                if let Some(da) = adapt.as_mut() {
                    *da = DualAveraging::new(eps);
                }
            }
        }
        if let Some(da) = adapt.as_mut() {
            if warming {
                da.update(accept_prob, cfg.target_accept);
                eps = da.current();
                if iter + 1 == cfg.warmup {
                    eps = da.adapted();
                }
            }
        }
        if !warming {
            draws.push(target.constrain(&q));
        }
    }

    Ok(ChainResult {
        draws,
        accept_rate: T::from_count(accepted) / T::from_count(cfg.samples),
        divergence_count: divergences,
        seed_used: seed,
        final_step_size: eps,
    })
}

fn validate<T: Real>(cfg: &HmcConfig<T>) -> Result<(), HmcError> {
    if cfg.samples == 0 {
        return Err(HmcError::BadConfig("samples must be at least 1"));
    }
    if cfg.chains == 0 {
        return Err(HmcError::BadConfig("need at least one chain"));
    }
    if cfg.num_leapfrog == 0 {
        return Err(HmcError::BadConfig("need at least one leapfrog step"));
    }
    if !(cfg.step_size > T::zero()) {
        return Err(HmcError::BadConfig("step size must be positive"));
    }
    if !(cfg.target_accept > T::zero() && cfg.target_accept < T::one()) {
        return Err(HmcError::BadConfig("target accept must lie in (0, 1)"));
    }
    Ok(())
}

/// Draw from `target` with one chain per `cfg.chains`, sequentially.
/// Fully reproducible: chain c uses RNG seed `cfg.seed + c`.
pub fn hmc_sample<T: Real, M: HmcTarget<T>>(
    target: &M,
    init: &[T],
    cfg: &HmcConfig<T>,
) -> Result<Vec<ChainResult<T>>, HmcError> {
    validate(cfg)?;
    (0..cfg.chains)
        .map(|c| run_chain(target, init, cfg, c))
        .collect()
}

/// Same draws as [`hmc_sample`], with chains executed on up to `threads`
/// worker threads. Chains own their RNG streams, so the results are
/// bit-identical to the sequential path.
pub fn hmc_sample_par<T: Real, M: HmcTarget<T>>(
    target: &M,
    init: &[T],
    cfg: &HmcConfig<T>,
    threads: usize,
) -> Result<Vec<ChainResult<T>>, HmcError> {
    if threads <= 1 || cfg.chains <= 1 {
        return hmc_sample(target, init, cfg);
    }
    validate(cfg)?;
    let mut results: Vec<Option<Result<ChainResult<T>, HmcError>>> =
        (0..cfg.chains).map(|_| None).collect();
    std::thread::scope(|scope| {
        for (c, slot) in results.iter_mut().enumerate() {
            scope.spawn(move || {
                *slot = Some(run_chain(target, init, cfg, c));
            });
        }
    });
    results
        .into_iter()
        .map(|r| r.expect("chain thread completed"))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hmc::{HmcTarget, StandardNormalTarget};

    /// 2-d Gaussian with correlation rho (unit variances).
    struct CorrelatedGaussian {
        rho: f64,
    }

    impl HmcTarget<f64> for CorrelatedGaussian {
        fn dim(&self) -> usize {
            2
        }
        fn log_posterior(&self, q: &[f64]) -> f64 {
            let det = 1.0 - self.rho * self.rho;
            -(q[0] * q[0] - 2.0 * self.rho * q[0] * q[1] + q[1] * q[1]) / (2.0 * det)
        }
        fn gradient(&self, q: &[f64]) -> Vec<f64> {
            let det = 1.0 - self.rho * self.rho;
            vec![
                -(q[0] - self.rho * q[1]) / det,
                -(q[1] - self.rho * q[0]) / det,
            ]
        }
    }

    fn pooled_mean_var(chains: &[ChainResult<f64>], param: usize) -> (f64, f64) {
        let pooled: Vec<f64> = chains.iter().flat_map(|c| c.column(param)).collect();
        let n = pooled.len() as f64;
        let mean = pooled.iter().sum::<f64>() / n;
        let var = pooled.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
        (mean, var)
    }

    #[test]
    fn standard_normal_moments_recovered() {
        let target = StandardNormalTarget { dim: 10 };
        let cfg = HmcConfig {
            warmup: 500,
            samples: 2000,
            chains: 4,
            seed: 11,
            num_leapfrog: 16,
            ..HmcConfig::default()
        };
        let chains = hmc_sample(&target, &[0.0; 10], &cfg).unwrap();
        for d in 0..10 {
            let (mean, var) = pooled_mean_var(&chains, d);
            assert!(mean.abs() < 0.05, "dim {d} mean {mean}");
            assert!((var - 1.0).abs() < 0.1, "dim {d} var {var}");
        }
        for c in &chains {
            assert!(
                (c.accept_rate - 0.8).abs() < 0.15,
                "accept {}",
                c.accept_rate
            );
            assert_eq!(c.divergence_count, 0);
        }
    }

    #[test]
    fn correlated_gaussian_recovers_rho() {
        let target = CorrelatedGaussian { rho: 0.8 };
        let cfg = HmcConfig {
            warmup: 500,
            samples: 4000,
            chains: 2,
            seed: 5,
            num_leapfrog: 24,
            ..HmcConfig::default()
        };
        let chains = hmc_sample(&target, &[0.0, 0.0], &cfg).unwrap();
        let xs: Vec<f64> = chains.iter().flat_map(|c| c.column(0)).collect();
        let ys: Vec<f64> = chains.iter().flat_map(|c| c.column(1)).collect();
        let r = crate::preprocess::pearson_correlation(&xs, &ys).unwrap();
        assert!((r - 0.8).abs() < 0.05, "sample correlation {r}");
    }

    #[test]
    fn same_seed_is_bit_identical() {
        let target = StandardNormalTarget { dim: 3 };
        let cfg = HmcConfig {
            warmup: 50,
            samples: 100,
            chains: 2,
            seed: 123,
            ..HmcConfig::default()
        };
        let a = hmc_sample(&target, &[0.0; 3], &cfg).unwrap();
        let b = hmc_sample(&target, &[0.0; 3], &cfg).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn parallel_chains_match_sequential() {
        let target = StandardNormalTarget { dim: 4 };
        let cfg = HmcConfig {
            warmup: 100,
            samples: 200,
            chains: 4,
            seed: 9,
            ..HmcConfig::default()
        };
        let seq = hmc_sample(&target, &[0.0; 4], &cfg).unwrap();
        let par = hmc_sample_par(&target, &[0.0; 4], &cfg, 4).unwrap();
        assert_eq!(seq, par);
    }

    /// Independent Gaussian with per-coordinate variances.
    struct DiagGaussian {
        variances: Vec<f64>,
    }

    impl HmcTarget<f64> for DiagGaussian {
        fn dim(&self) -> usize {
            self.variances.len()
        }
        fn log_posterior(&self, q: &[f64]) -> f64 {
            -q.iter()
                .zip(&self.variances)
                .map(|(&x, &v)| x * x / (2.0 * v))
                .sum::<f64>()
        }
        fn gradient(&self, q: &[f64]) -> Vec<f64> {
            q.iter().zip(&self.variances).map(|(&x, &v)| -x / v).collect()
        }
    }

    #[test]
    fn mass_adaptation_handles_anisotropic_scales() {
        let target = DiagGaussian {
            variances: vec![100.0, 1.0, 0.01],
        };
        let cfg = HmcConfig {
            warmup: 1000,
            samples: 2000,
            chains: 2,
            seed: 21,
            num_leapfrog: 24,
            adapt_mass: true,
            ..HmcConfig::default()
        };
        let chains = hmc_sample(&target, &[0.0, 0.0, 0.0], &cfg).unwrap();
        for (d, &v) in target.variances.iter().enumerate() {
            let (mean, var) = pooled_mean_var(&chains, d);
            assert!(mean.abs() < 0.1 * v.sqrt(), "dim {d} mean {mean}");
            assert!(
                (var - v).abs() < 0.25 * v,
                "dim {d}: sample var {var}, want about {v}"
            );
        }
    }

    #[test]
    fn unit_mass_flag_off_is_the_default_path() {
        // adapt_mass = false must reproduce the historical draws exactly
        let target = StandardNormalTarget { dim: 3 };
        let base = HmcConfig {
            warmup: 50,
            samples: 100,
            chains: 1,
            seed: 123,
            ..HmcConfig::default()
        };
        let with_flag = HmcConfig {
            adapt_mass: false,
            ..base.clone()
        };
        assert_eq!(
            hmc_sample(&target, &[0.0; 3], &base).unwrap(),
            hmc_sample(&target, &[0.0; 3], &with_flag).unwrap()
        );
    }

    #[test]
    fn bad_init_is_rejected() {
        struct Hole;
        impl HmcTarget<f64> for Hole {
            fn dim(&self) -> usize {
                1
            }
            fn log_posterior(&self, _: &[f64]) -> f64 {
                f64::NAN
            }
            fn gradient(&self, _: &[f64]) -> Vec<f64> {
                vec![0.0]
            }
        }
        let cfg = HmcConfig::default();
        assert_eq!(
            hmc_sample(&Hole, &[0.0], &cfg).unwrap_err(),
            HmcError::BadInit
        );
    }

    #[test]
    fn config_validation() {
        let target = StandardNormalTarget { dim: 1 };
        let bad = HmcConfig {
            samples: 0,
            ..HmcConfig::default()
        };
        assert!(matches!(
            hmc_sample(&target, &[0.0], &bad).unwrap_err(),
            HmcError::BadConfig(_)
        ));
    }
}
