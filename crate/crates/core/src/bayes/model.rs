//! Hierarchical negative-binomial model of gene-expression counts.
//!
//! Per gene g and sample s, the count is negative-binomial with shared
//! dispersion and a log mean built from the sample's sequencing depth, a
//! per-gene level and a per-gene stage effect:
//!
//! ```text
//! k[g,s] ~ NB(mu[g,s], phi),  ln mu[g,s] = ln(total_s * scale) + alpha_g + beta_g * x_s
//! alpha_g ~ Normal(mu_alpha, sigma_alpha)     beta_g ~ Normal(0, sigma_beta)
//! mu_alpha ~ Normal(0, 5)   sigma_alpha, sigma_beta ~ HalfNormal(1)
//! phi ~ HalfNormal(5)
//! ```
//!
//! Scale parameters are sampled on the log scale with their Jacobian terms
//! included, so the posterior is defined on an unconstrained vector.

use serde::{Deserialize, Serialize};

use super::dist::{log_half_normal_pdf, log_normal_pdf};
use super::BayesError;
use crate::ingest::{CountSampleMeta, CountTable, ExpressionMatrix, GeneId};
use crate::num::Real;
use crate::special::{digamma, ln_factorial, ln_gamma};

/// Count observations with their per-sample depth and stage covariate.
#[derive(Debug, Clone, PartialEq)]
pub struct CountData {
    gene_ids: Vec<GeneId>,
    /// gene-major grid, `gene_ids.len() * totals.len()` entries
    counts: Vec<u64>,
    totals: Vec<u64>,
    stage_indicator: Vec<u8>,
}

impl CountData {
    pub fn new(
        gene_ids: Vec<GeneId>,
        counts: Vec<u64>,
        totals: Vec<u64>,
        stage_indicator: Vec<u8>,
    ) -> Result<Self, BayesError> {
        let (g, s) = (gene_ids.len(), totals.len());
        if counts.len() != g * s || stage_indicator.len() != s {
            return Err(BayesError::DomainError);
        }
        if stage_indicator.iter().any(|&x| x > 1) || totals.contains(&0) {
            return Err(BayesError::DomainError);
        }
        // summed counts of the modeled genes cannot exceed the depth
        for si in 0..s {
            let sum: u64 = (0..g).map(|gi| counts[gi * s + si]).sum();
            if sum > totals[si] {
                return Err(BayesError::DomainError);
            }
        }
        Ok(CountData {
            gene_ids,
            counts,
            totals,
            stage_indicator,
        })
    }

    /// Join a parsed count table with its metadata sidecar, aligning
    /// sample columns by id.
    pub fn assemble(table: &CountTable, meta: &[CountSampleMeta]) -> Result<Self, BayesError> {
        let s = table.sample_ids.len();
        let mut totals = Vec::with_capacity(s);
        let mut stage = Vec::with_capacity(s);
        for id in &table.sample_ids {
            let m = meta
                .iter()
                .find(|m| &m.sample_id == id)
                .ok_or(BayesError::MissingSample(id.clone()))?;
            totals.push(m.total);
            stage.push(m.stage_indicator);
        }
        CountData::new(table.genes.clone(), table.counts.clone(), totals, stage)
    }

    pub fn n_genes(&self) -> usize {
        self.gene_ids.len()
    }

    pub fn n_samples(&self) -> usize {
        self.totals.len()
    }

    pub fn gene_ids(&self) -> &[GeneId] {
        &self.gene_ids
    }

    pub fn count(&self, gene: usize, sample: usize) -> u64 {
        self.counts[gene * self.n_samples() + sample]
    }

    pub fn total(&self, sample: usize) -> u64 {
        self.totals[sample]
    }

    pub fn stage(&self, sample: usize) -> u8 {
        self.stage_indicator[sample]
    }
}

/// Map a signed fold-change matrix to pseudo-counts for the count model:
/// up-regulation scales the base count up (`scale * v`), down-regulation
/// scales it down (`scale / |v|`); missing entries become zero counts.
/// Per-sample totals are the column sums. Intended as fixture tooling when
/// no raw counts are available.
pub fn fold_to_pseudocounts<T: Real>(matrix: &ExpressionMatrix<T>, scale: T) -> CountData {
    let (g, s) = (matrix.n_genes(), matrix.n_samples());
    let mut counts = vec![0u64; g * s];
    for gi in 0..g {
        for si in 0..s {
            if let Some(v) = matrix.value(gi, si) {
                let c = if v > T::zero() { scale * v } else { scale / v.abs() };
                counts[gi * s + si] = c.round().to_u64().unwrap_or(0);
            }
        }
    }
    let totals: Vec<u64> = (0..s)
        .map(|si| (0..g).map(|gi| counts[gi * s + si]).sum::<u64>().max(1))
        .collect();
    let stage: Vec<u8> = matrix.samples().iter().map(|m| m.stage.indicator()).collect();
    CountData::new(matrix.genes().to_vec(), counts, totals, stage)
        .expect("pseudo-counts satisfy the invariants by construction")
}

/// Unconstrained model parameter vector.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams<T: Real> {
    pub mu_alpha: T,
    pub log_sigma_alpha: T,
    pub alpha: Vec<T>,
    pub log_sigma_beta: T,
    pub beta: Vec<T>,
    pub log_dispersion: T,
}

impl<T: Real> ModelParams<T> {
    pub fn dim(n_genes: usize) -> usize {
        2 * n_genes + 4
    }

    /// Packing order: `mu_alpha, log_sigma_alpha, alpha..., log_sigma_beta,
    /// beta..., log_dispersion` (matching the reported table layout).
    pub fn from_unconstrained(v: &[T], n_genes: usize) -> Result<Self, BayesError> {
        if v.len() != Self::dim(n_genes) {
            return Err(BayesError::DomainError);
        }
        Ok(ModelParams {
            mu_alpha: v[0],
            log_sigma_alpha: v[1],
            alpha: v[2..2 + n_genes].to_vec(),
            log_sigma_beta: v[2 + n_genes],
            beta: v[3 + n_genes..3 + 2 * n_genes].to_vec(),
            log_dispersion: v[3 + 2 * n_genes],
        })
    }

    pub fn to_unconstrained(&self) -> Vec<T> {
        let mut v = Vec::with_capacity(Self::dim(self.alpha.len()));
        v.push(self.mu_alpha);
        v.push(self.log_sigma_alpha);
        v.extend_from_slice(&self.alpha);
        v.push(self.log_sigma_beta);
        v.extend_from_slice(&self.beta);
        v.push(self.log_dispersion);
        v
    }

    /// Indices of log-scale coordinates within the packed vector; these are
    /// exponentiated when draws are reported on the constrained scale.
    pub fn log_scale_indices(n_genes: usize) -> Vec<usize> {
        vec![1, 2 + n_genes, 3 + 2 * n_genes]
    }

    /// Report names in packed order: hyperparameters first, then the
    /// per-gene blocks, dispersion last. Gene indices are 1-based.
    pub fn names(n_genes: usize) -> Vec<String> {
        let mut names = vec!["mu_alpha".to_string(), "sigma_alpha".to_string()];
        names.extend((1..=n_genes).map(|i| format!("alpha[{i}]")));
        names.push("sigma_beta".to_string());
        names.extend((1..=n_genes).map(|i| format!("beta[{i}]")));
        names.push("sigma".to_string());
        names
    }
}

/// Hyperprior scales and the depth-offset multiplier.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PriorConfig<T: Real> {
    pub mu_alpha_sd: T,
    pub sigma_alpha_scale: T,
    pub sigma_beta_scale: T,
    pub dispersion_scale: T,
    /// multiplier on the per-sample depth inside the offset
    pub count_scale: T,
}

impl<T: Real> Default for PriorConfig<T> {
    fn default() -> Self {
        PriorConfig {
            mu_alpha_sd: T::c(5.0),
            sigma_alpha_scale: T::one(),
            sigma_beta_scale: T::one(),
            dispersion_scale: T::c(5.0),
            count_scale: T::one(),
        }
    }
}

/// `ln(exp(a) + exp(b))` without overflow.
fn log_add_exp<T: Real>(a: T, b: T) -> T {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// NB log pmf driven by `ln mu` and `ln phi`, stable for extreme means.
fn log_negbinom_from_logs<T: Real>(k: u64, log_mu: T, log_phi: T) -> T {
    let phi = log_phi.exp();
    let kf = T::from_u64(k).expect("count fits scalar");
    let lae = log_add_exp(log_phi, log_mu); // ln(phi + mu)
    ln_gamma(kf + phi) - ln_gamma(phi) - ln_factorial::<T>(k)
        + phi * (log_phi - lae)
        + kf * (log_mu - lae)
}

/// Joint log-posterior (up to a constant) of the hierarchical model on the
/// unconstrained scale, Jacobian terms included.
pub fn model_log_posterior<T: Real>(
    params: &ModelParams<T>,
    data: &CountData,
    prior: &PriorConfig<T>,
) -> Result<T, BayesError> {
    let g = data.n_genes();
    if params.alpha.len() != g || params.beta.len() != g {
        return Err(BayesError::DomainError);
    }
    let sigma_alpha = params.log_sigma_alpha.exp();
    let sigma_beta = params.log_sigma_beta.exp();
    let dispersion = params.log_dispersion.exp();

    let mut lp = T::zero();
    for gi in 0..g {
        for si in 0..data.n_samples() {
            let offset = (T::from_u64(data.total(si)).expect("depth fits scalar")
                * prior.count_scale)
                .ln();
            let log_mu = offset
                + params.alpha[gi]
                + params.beta[gi] * T::from_u64(data.stage(si) as u64).expect("0/1");
            lp += log_negbinom_from_logs(data.count(gi, si), log_mu, params.log_dispersion);
        }
    }
    for gi in 0..g {
        lp += log_normal_pdf(params.alpha[gi], params.mu_alpha, sigma_alpha);
        lp += log_normal_pdf(params.beta[gi], T::zero(), sigma_beta);
    }
    lp += log_normal_pdf(params.mu_alpha, T::zero(), prior.mu_alpha_sd);
    lp += log_half_normal_pdf(sigma_alpha, prior.sigma_alpha_scale);
    lp += log_half_normal_pdf(sigma_beta, prior.sigma_beta_scale);
    lp += log_half_normal_pdf(dispersion, prior.dispersion_scale);
    // Jacobians of the log transforms
    lp += params.log_sigma_alpha + params.log_sigma_beta + params.log_dispersion;

    if lp.is_finite() {
        Ok(lp)
    } else {
        Err(BayesError::NonFinite)
    }
}

/// Analytic gradient of [`model_log_posterior`] with respect to the packed
/// unconstrained vector.
pub fn model_gradient<T: Real>(
    params: &ModelParams<T>,
    data: &CountData,
    prior: &PriorConfig<T>,
) -> Result<Vec<T>, BayesError> {
    let g = data.n_genes();
    if params.alpha.len() != g || params.beta.len() != g {
        return Err(BayesError::DomainError);
    }
    let sigma_alpha = params.log_sigma_alpha.exp();
    let sigma_beta = params.log_sigma_beta.exp();
    let dispersion = params.log_dispersion.exp();
    let var_alpha = sigma_alpha * sigma_alpha;
    let var_beta = sigma_beta * sigma_beta;

    let mut d_mu_alpha = T::zero();
    let mut d_log_sigma_alpha = T::zero();
    let mut d_alpha = vec![T::zero(); g];
    let mut d_log_sigma_beta = T::zero();
    let mut d_beta = vec![T::zero(); g];
    let mut d_log_dispersion = T::zero();

    for gi in 0..g {
        for si in 0..data.n_samples() {
            let x = T::from_u64(data.stage(si) as u64).expect("0/1");
            let offset = (T::from_u64(data.total(si)).expect("depth fits scalar")
                * prior.count_scale)
                .ln();
            let log_mu = offset + params.alpha[gi] + params.beta[gi] * x;
            let k = data.count(gi, si);
            let kf = T::from_u64(k).expect("count fits scalar");
            let lae = log_add_exp(params.log_dispersion, log_mu);
            // d/d(log mu): k - mu (k + phi) / (phi + mu)
            let mu_frac = (log_mu - lae).exp(); // mu / (phi + mu)
            let d_eta = kf - (kf + dispersion) * mu_frac;
            d_alpha[gi] += d_eta;
            d_beta[gi] += x * d_eta;
            // d/d(log phi), chain rule through phi = exp(log phi)
            let phi_term = digamma(kf + dispersion) - digamma(dispersion)
                + (params.log_dispersion - lae)
                + T::one()
                - (kf + dispersion) * (-lae).exp();
            d_log_dispersion += dispersion * phi_term;
        }
    }
    for gi in 0..g {
        let za = (params.alpha[gi] - params.mu_alpha) / sigma_alpha;
        d_alpha[gi] -= za / sigma_alpha;
        d_mu_alpha += za / sigma_alpha;
        d_log_sigma_alpha += za * za - T::one();
        let zb = params.beta[gi] / sigma_beta;
        d_beta[gi] -= zb / sigma_beta;
        d_log_sigma_beta += zb * zb - T::one();
    }
    d_mu_alpha -= params.mu_alpha / (prior.mu_alpha_sd * prior.mu_alpha_sd);
    // half-normal hyperpriors plus the Jacobian terms
    d_log_sigma_alpha +=
        T::one() - var_alpha / (prior.sigma_alpha_scale * prior.sigma_alpha_scale);
    d_log_sigma_beta += T::one() - var_beta / (prior.sigma_beta_scale * prior.sigma_beta_scale);
    d_log_dispersion += T::one()
        - dispersion * dispersion / (prior.dispersion_scale * prior.dispersion_scale);

    let mut grad = Vec::with_capacity(ModelParams::<T>::dim(g));
    grad.push(d_mu_alpha);
    grad.push(d_log_sigma_alpha);
    grad.extend(d_alpha);
    grad.push(d_log_sigma_beta);
    grad.extend(d_beta);
    grad.push(d_log_dispersion);
    if grad.iter().all(|v| v.is_finite()) {
        Ok(grad)
    } else {
        Err(BayesError::NonFinite)
    }
}

/// The hierarchical model as a sampling target: packed unconstrained
/// coordinates, analytic gradient, scale parameters exponentiated on the
/// reporting scale. Non-finite posterior values (forbidden regions) come
/// back as `-inf` so the sampler rejects there.
#[derive(Debug, Clone)]
pub struct NbModelTarget<'a, T: Real> {
    pub data: &'a CountData,
    pub prior: PriorConfig<T>,
}

impl<'a, T: Real> crate::hmc::HmcTarget<T> for NbModelTarget<'a, T> {
    fn dim(&self) -> usize {
        ModelParams::<T>::dim(self.data.n_genes())
    }

    fn log_posterior(&self, position: &[T]) -> T {
        let params = match ModelParams::from_unconstrained(position, self.data.n_genes()) {
            Ok(p) => p,
            Err(_) => return T::neg_infinity(),
        };
        model_log_posterior(&params, self.data, &self.prior).unwrap_or(T::neg_infinity())
    }

    fn gradient(&self, position: &[T]) -> Vec<T> {
        let g = self.data.n_genes();
        match ModelParams::from_unconstrained(position, g)
            .and_then(|p| model_gradient(&p, self.data, &self.prior))
        {
            Ok(grad) => grad,
            Err(_) => vec![T::nan(); ModelParams::<T>::dim(g)],
        }
    }

    fn constrain(&self, position: &[T]) -> Vec<T> {
        let mut out = position.to_vec();
        for &i in &ModelParams::<T>::log_scale_indices(self.data.n_genes()) {
            out[i] = out[i].exp();
        }
        out
    }
}

/// The same posterior in non-centered coordinates: the sampler moves
/// `(mu_alpha, log sigma_alpha, alpha_raw, log sigma_beta, beta_raw,
/// log phi)` with `alpha = mu_alpha + sigma_alpha * alpha_raw` and
/// `beta = sigma_beta * beta_raw`, which removes the funnel geometry the
/// centered hierarchy develops when the scale posteriors concentrate near
/// zero. Draws are reported on the centered constrained scale, so the
/// output is interchangeable with [`NbModelTarget`].
#[derive(Debug, Clone)]
pub struct NbModelNoncentered<'a, T: Real> {
    pub data: &'a CountData,
    pub prior: PriorConfig<T>,
}

impl<'a, T: Real> NbModelNoncentered<'a, T> {
    fn centered(&self, position: &[T]) -> Result<ModelParams<T>, BayesError> {
        let raw = ModelParams::from_unconstrained(position, self.data.n_genes())?;
        let sigma_alpha = raw.log_sigma_alpha.exp();
        let sigma_beta = raw.log_sigma_beta.exp();
        Ok(ModelParams {
            alpha: raw
                .alpha
                .iter()
                .map(|&a| raw.mu_alpha + sigma_alpha * a)
                .collect(),
            beta: raw.beta.iter().map(|&b| sigma_beta * b).collect(),
            ..raw
        })
    }
}

impl<'a, T: Real> crate::hmc::HmcTarget<T> for NbModelNoncentered<'a, T> {
    fn dim(&self) -> usize {
        ModelParams::<T>::dim(self.data.n_genes())
    }

    /// Exact reparameterization: equals the centered log-posterior at the
    /// mapped point plus the log-Jacobian `G (log sigma_alpha + log
    /// sigma_beta)`.
    fn log_posterior(&self, position: &[T]) -> T {
        let g = self.data.n_genes();
        let (raw, centered) = match ModelParams::from_unconstrained(position, g)
            .and_then(|raw| self.centered(position).map(|c| (raw, c)))
        {
            Ok(pair) => pair,
            Err(_) => return T::neg_infinity(),
        };
        match model_log_posterior(&centered, self.data, &self.prior) {
            Ok(lp) => {
                lp + T::from_count(g) * (raw.log_sigma_alpha + raw.log_sigma_beta)
            }
            Err(_) => T::neg_infinity(),
        }
    }

    fn gradient(&self, position: &[T]) -> Vec<T> {
        let g = self.data.n_genes();
        let dim = ModelParams::<T>::dim(g);
        let pair = ModelParams::from_unconstrained(position, g)
            .and_then(|raw| self.centered(position).map(|c| (raw, c)));
        let (raw, centered) = match pair {
            Ok(p) => p,
            Err(_) => return vec![T::nan(); dim],
        };
        let centered_grad = match model_gradient(&centered, self.data, &self.prior) {
            Ok(grad) => grad,
            Err(_) => return vec![T::nan(); dim],
        };
        // chain rule through alpha = mu_alpha + sigma_alpha * alpha_raw and
        // beta = sigma_beta * beta_raw, plus the Jacobian contribution
        let sigma_alpha = raw.log_sigma_alpha.exp();
        let sigma_beta = raw.log_sigma_beta.exp();
        let c = ModelParams::from_unconstrained(&centered_grad, g).expect("same packing");
        let mut d_mu_alpha = c.mu_alpha;
        let mut d_log_sigma_alpha = c.log_sigma_alpha + T::from_count(g);
        let mut d_log_sigma_beta = c.log_sigma_beta + T::from_count(g);
        let mut d_alpha = vec![T::zero(); g];
        let mut d_beta = vec![T::zero(); g];
        for i in 0..g {
            d_mu_alpha += c.alpha[i];
            d_log_sigma_alpha += c.alpha[i] * sigma_alpha * raw.alpha[i];
            d_alpha[i] = c.alpha[i] * sigma_alpha;
            d_log_sigma_beta += c.beta[i] * sigma_beta * raw.beta[i];
            d_beta[i] = c.beta[i] * sigma_beta;
        }
        ModelParams {
            mu_alpha: d_mu_alpha,
            log_sigma_alpha: d_log_sigma_alpha,
            alpha: d_alpha,
            log_sigma_beta: d_log_sigma_beta,
            beta: d_beta,
            log_dispersion: c.log_dispersion,
        }
        .to_unconstrained()
    }

    fn constrain(&self, position: &[T]) -> Vec<T> {
        match self.centered(position) {
            Ok(centered) => {
                let mut out = centered.to_unconstrained();
                for &i in &ModelParams::<T>::log_scale_indices(self.data.n_genes()) {
                    out[i] = out[i].exp();
                }
                out
            }
            Err(_) => vec![T::nan(); ModelParams::<T>::dim(self.data.n_genes())],
        }
    }
}

impl<T: Real> crate::hmc::HmcTarget<T> for super::conjugate::DirichletMultinomialTarget<T> {
    fn dim(&self) -> usize {
        self.dim()
    }

    fn log_posterior(&self, position: &[T]) -> T {
        self.log_posterior(position)
    }

    fn gradient(&self, position: &[T]) -> Vec<T> {
        self.gradient(position)
    }

    /// Report draws as points on the probability simplex. The constrained
    /// dimension is one higher than the sampling dimension.
    fn constrain(&self, position: &[T]) -> Vec<T> {
        self.to_simplex(position)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bayes::dist::log_negbinom_pmf;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn small_data() -> CountData {
        let genes = vec![GeneId::new("A").unwrap(), GeneId::new("B").unwrap()];
        CountData::new(
            genes,
            vec![12, 30, 7, 25, 40, 11],
            vec![1000, 2000, 900],
            vec![0, 1, 1],
        )
        .unwrap()
    }

    fn params_for(data: &CountData, seed: u64) -> ModelParams<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = data.n_genes();
        let mut draw = || rng.random::<f64>() * 2.0 - 1.0;
        ModelParams {
            mu_alpha: draw(),
            log_sigma_alpha: draw(),
            alpha: (0..g).map(|_| draw() - 3.0).collect(),
            log_sigma_beta: draw(),
            beta: (0..g).map(|_| draw() * 0.3).collect(),
            log_dispersion: draw() + 1.0,
        }
    }

    #[test]
    fn count_data_validates() {
        let genes = vec![GeneId::new("A").unwrap()];
        // counts exceed the sample depth
        assert_eq!(
            CountData::new(genes.clone(), vec![11], vec![10], vec![0]).unwrap_err(),
            BayesError::DomainError
        );
        // indicator out of range
        assert_eq!(
            CountData::new(genes.clone(), vec![1], vec![10], vec![2]).unwrap_err(),
            BayesError::DomainError
        );
        assert!(CountData::new(genes, vec![1], vec![10], vec![1]).is_ok());
    }

    #[test]
    fn packing_round_trips() {
        let data = small_data();
        let p = params_for(&data, 1);
        let v = p.to_unconstrained();
        assert_eq!(v.len(), ModelParams::<f64>::dim(2));
        let q = ModelParams::from_unconstrained(&v, 2).unwrap();
        assert_eq!(p, q);
    }

    #[test]
    fn names_follow_table_layout() {
        let names = ModelParams::<f64>::names(3);
        assert_eq!(
            names,
            vec![
                "mu_alpha",
                "sigma_alpha",
                "alpha[1]",
                "alpha[2]",
                "alpha[3]",
                "sigma_beta",
                "beta[1]",
                "beta[2]",
                "beta[3]",
                "sigma"
            ]
        );
        assert_eq!(ModelParams::<f64>::log_scale_indices(3), vec![1, 5, 9]);
    }

    #[test]
    fn log_posterior_matches_term_by_term_oracle() {
        // single gene, single sample, hand-set parameters
        let data = CountData::new(
            vec![GeneId::new("A").unwrap()],
            vec![17],
            vec![500],
            vec![1],
        )
        .unwrap();
        let p = ModelParams {
            mu_alpha: -0.4,
            log_sigma_alpha: -1.2,
            alpha: vec![-3.1],
            log_sigma_beta: -1.5,
            beta: vec![0.2],
            log_dispersion: 1.1,
        };
        let prior = PriorConfig::default();
        let got = model_log_posterior(&p, &data, &prior).unwrap();

        // independent term-by-term computation through the public pmf
        let mu = (500.0f64.ln() + p.alpha[0] + p.beta[0]).exp();
        let phi = p.log_dispersion.exp();
        let expected = log_negbinom_pmf(17, mu, phi).unwrap()
            + log_normal_pdf(p.alpha[0], p.mu_alpha, (-1.2f64).exp())
            + log_normal_pdf(p.beta[0], 0.0, (-1.5f64).exp())
            + log_normal_pdf(p.mu_alpha, 0.0, 5.0)
            + log_half_normal_pdf((-1.2f64).exp(), 1.0)
            + log_half_normal_pdf((-1.5f64).exp(), 1.0)
            + log_half_normal_pdf(phi, 5.0)
            + p.log_sigma_alpha
            + p.log_sigma_beta
            + p.log_dispersion;
        assert!((got - expected).abs() < 1e-10, "{got} vs {expected}");
    }

    #[test]
    fn zero_gene_data_is_hyperprior_only() {
        let data = CountData::new(vec![], vec![], vec![100], vec![0]).unwrap();
        let p = ModelParams {
            mu_alpha: 0.3,
            log_sigma_alpha: -0.5,
            alpha: vec![],
            log_sigma_beta: -0.7,
            beta: vec![],
            log_dispersion: 0.9,
        };
        let prior = PriorConfig::default();
        let got = model_log_posterior(&p, &data, &prior).unwrap();
        let expected = log_normal_pdf(0.3, 0.0, 5.0)
            + log_half_normal_pdf((-0.5f64).exp(), 1.0)
            + log_half_normal_pdf((-0.7f64).exp(), 1.0)
            + log_half_normal_pdf(0.9f64.exp(), 5.0)
            - 0.5 - 0.7 + 0.9;
        assert!((got - expected).abs() < 1e-12);
        // gradient likewise reduces to the hyperprior part
        let grad = model_gradient(&p, &data, &prior).unwrap();
        assert_eq!(grad.len(), 4);
    }

    #[test]
    fn likelihood_shift_invariance_in_alpha_and_offset() {
        // adding c to every alpha while dividing the offset scale by e^c
        // leaves the likelihood part unchanged; priors absorb the rest
        let data = small_data();
        let p = params_for(&data, 3);
        let mut shifted = p.clone();
        let c = 0.37f64;
        for a in &mut shifted.alpha {
            *a += c;
        }
        let prior = PriorConfig::default();
        let prior_shifted = PriorConfig {
            count_scale: (-c).exp(),
            ..PriorConfig::default()
        };
        // isolate the likelihood by cancelling the prior difference
        let prior_terms = |p: &ModelParams<f64>, pr: &PriorConfig<f64>| {
            let sa = p.log_sigma_alpha.exp();
            let sb = p.log_sigma_beta.exp();
            let mut t = 0.0;
            for gi in 0..2 {
                t += log_normal_pdf(p.alpha[gi], p.mu_alpha, sa);
                t += log_normal_pdf(p.beta[gi], 0.0, sb);
            }
            t + log_normal_pdf(p.mu_alpha, 0.0, pr.mu_alpha_sd)
                + log_half_normal_pdf(sa, pr.sigma_alpha_scale)
                + log_half_normal_pdf(sb, pr.sigma_beta_scale)
                + log_half_normal_pdf(p.log_dispersion.exp(), pr.dispersion_scale)
                + p.log_sigma_alpha
                + p.log_sigma_beta
                + p.log_dispersion
        };
        let lik_a = model_log_posterior(&p, &data, &prior).unwrap() - prior_terms(&p, &prior);
        let lik_b = model_log_posterior(&shifted, &data, &prior_shifted).unwrap()
            - prior_terms(&shifted, &prior_shifted);
        assert!((lik_a - lik_b).abs() < 1e-9, "{lik_a} vs {lik_b}");
    }

    #[test]
    fn gradient_matches_central_finite_differences() {
        let data = small_data();
        let prior = PriorConfig::default();
        for seed in 0..20u64 {
            let p = params_for(&data, seed);
            let v = p.to_unconstrained();
            let grad = model_gradient(&p, &data, &prior).unwrap();
            let h = 1e-5;
            for i in 0..v.len() {
                let mut vp = v.clone();
                let mut vm = v.clone();
                vp[i] += h;
                vm[i] -= h;
                let fp = model_log_posterior(
                    &ModelParams::from_unconstrained(&vp, 2).unwrap(),
                    &data,
                    &prior,
                )
                .unwrap();
                let fm = model_log_posterior(
                    &ModelParams::from_unconstrained(&vm, 2).unwrap(),
                    &data,
                    &prior,
                )
                .unwrap();
                let fd = (fp - fm) / (2.0 * h);
                let rel = (grad[i] - fd).abs() / grad[i].abs().max(fd.abs()).max(1.0);
                assert!(rel < 1e-5, "seed {seed} coord {i}: {} vs {fd}", grad[i]);
            }
        }
    }

    #[test]
    fn prior_gradient_stationary_at_mean() {
        // with alpha symmetric around mu_alpha, only the hyperprior pulls
        let data = CountData::new(vec![], vec![], vec![100], vec![0]).unwrap();
        let p = ModelParams {
            mu_alpha: 0.0,
            log_sigma_alpha: 0.0,
            alpha: vec![],
            log_sigma_beta: 0.0,
            beta: vec![],
            log_dispersion: 0.0,
        };
        let grad = model_gradient(&p, &data, &PriorConfig::default()).unwrap();
        assert_eq!(grad[0], 0.0); // mu_alpha at its hyperprior mean
    }

    #[test]
    fn extreme_parameters_stay_finite() {
        let data = small_data();
        let prior = PriorConfig::default();
        for magnitude in [10.0, 30.0] {
            for sign in [-1.0, 1.0] {
                let v = vec![sign * magnitude; ModelParams::<f64>::dim(2)];
                let p = ModelParams::from_unconstrained(&v, 2).unwrap();
                let lp = model_log_posterior(&p, &data, &prior);
                assert!(lp.is_ok(), "magnitude {magnitude} sign {sign}: {lp:?}");
            }
        }
    }

    #[test]
    fn noncentered_density_is_exact_reparameterization() {
        // L_nc(z) = L_c(T(z)) + G (log sigma_alpha + log sigma_beta)
        use crate::hmc::HmcTarget;
        let data = small_data();
        let prior = PriorConfig::default();
        let target = NbModelNoncentered {
            data: &data,
            prior: prior.clone(),
        };
        for seed in 0..10u64 {
            let raw = params_for(&data, seed);
            let z = raw.to_unconstrained();
            let centered = target.centered(&z).unwrap();
            let expected = model_log_posterior(&centered, &data, &prior).unwrap()
                + 2.0 * (raw.log_sigma_alpha + raw.log_sigma_beta);
            let got = target.log_posterior(&z);
            assert!((got - expected).abs() < 1e-10, "seed {seed}: {got} vs {expected}");
        }
    }

    #[test]
    fn noncentered_gradient_matches_finite_differences() {
        use crate::hmc::HmcTarget;
        let data = small_data();
        let target = NbModelNoncentered {
            data: &data,
            prior: PriorConfig::default(),
        };
        for seed in 40..50u64 {
            let z = params_for(&data, seed).to_unconstrained();
            let grad = target.gradient(&z);
            let h = 1e-5;
            for i in 0..z.len() {
                let mut zp = z.clone();
                let mut zm = z.clone();
                zp[i] += h;
                zm[i] -= h;
                let fd = (target.log_posterior(&zp) - target.log_posterior(&zm)) / (2.0 * h);
                let rel = (grad[i] - fd).abs() / grad[i].abs().max(fd.abs()).max(1.0);
                assert!(rel < 1e-5, "seed {seed} coord {i}: {} vs {fd}", grad[i]);
            }
        }
    }

    #[test]
    fn noncentered_constrain_reports_centered_quantities() {
        use crate::hmc::HmcTarget;
        let data = small_data();
        let target = NbModelNoncentered {
            data: &data,
            prior: PriorConfig::default(),
        };
        let raw = params_for(&data, 8);
        let z = raw.to_unconstrained();
        let out = target.constrain(&z);
        let sigma_alpha = raw.log_sigma_alpha.exp();
        assert!((out[0] - raw.mu_alpha).abs() < 1e-15);
        assert!((out[1] - sigma_alpha).abs() < 1e-15);
        // alpha block is mu_alpha + sigma_alpha * raw
        assert!((out[2] - (raw.mu_alpha + sigma_alpha * raw.alpha[0])).abs() < 1e-12);
        // dispersion reported on the positive scale
        assert!((out[7] - raw.log_dispersion.exp()).abs() < 1e-12);
    }

    proptest::proptest! {
        // the log transforms keep every finite unconstrained point legal
        #[test]
        fn log_posterior_finite_on_finite_vectors(
            v in proptest::collection::vec(-30.0f64..30.0, 8)
        ) {
            let data = small_data();
            let p = ModelParams::from_unconstrained(&v, 2).unwrap();
            let lp = model_log_posterior(&p, &data, &PriorConfig::default()).unwrap();
            proptest::prop_assert!(lp.is_finite());
        }
    }

    #[test]
    fn pseudocounts_scale_and_round() {
        use crate::ingest::{parse_expression_table, Delimiter};
        let m: ExpressionMatrix<f64> =
            parse_expression_table("gene,s1,s2\nA,2.0,NA\nB,-4.0,1.5\n", Delimiter::Comma)
                .unwrap();
        let d = fold_to_pseudocounts(&m, 100.0);
        assert_eq!(d.count(0, 0), 200); // 100 * 2.0
        assert_eq!(d.count(0, 1), 0); // missing
        assert_eq!(d.count(1, 0), 25); // 100 / 4
        assert_eq!(d.count(1, 1), 150);
        assert_eq!(d.total(0), 225);
    }
}
