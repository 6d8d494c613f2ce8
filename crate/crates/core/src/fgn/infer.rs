//! End-to-end factor-graph inference: pool expression values, fit the
//! state mixture, turn responsibilities into per-gene evidence, run LBP,
//! and re-estimate the mixture from the resulting beliefs until the
//! beliefs settle.

use std::collections::BTreeMap;

use super::gmm::{fit_gmm, responsibilities, EmConfig, Gmm};
use super::graph::build_factor_graph;
use super::lbp::{run_lbp, ConvergenceTrace, LbpConfig, Marginals};
use super::FgnError;
use crate::ingest::{ExpressionMatrix, GeneId};
use crate::num::Real;
use crate::preprocess::{correlation_pvalue, pearson_correlation, CoexpressionNetwork, ProfileTransform};

/// How the outer loop refreshes the mixture between LBP rounds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GmmUpdate {
    /// Weight each observation's component membership by its gene's LBP
    /// belief before re-estimating the mixture statistics.
    #[default]
    Beliefs,
    /// Refit the mixture on the raw pooled data each round (converges
    /// after the first round by construction).
    RawData,
}

/// Settings for [`discretize_and_infer`].
#[derive(Debug, Clone, PartialEq)]
pub struct InferConfig<T: Real> {
    pub n_states: usize,
    pub coupling: T,
    pub transform: ProfileTransform,
    pub em: EmConfig<T>,
    pub lbp: LbpConfig<T>,
    pub gmm_update: GmmUpdate,
    pub outer_max_iter: usize,
    pub outer_tol: T,
}

impl<T: Real> Default for InferConfig<T> {
    fn default() -> Self {
        InferConfig {
            n_states: 2,
            coupling: T::one(),
            transform: ProfileTransform::SignedLog2,
            em: EmConfig::default(),
            lbp: LbpConfig::default(),
            gmm_update: GmmUpdate::Beliefs,
            outer_max_iter: 20,
            outer_tol: T::c(1e-6),
        }
    }
}

/// Everything one inference run produces.
#[derive(Debug, Clone, PartialEq)]
pub struct FgnResult<T: Real> {
    pub marginals: Marginals<T>,
    pub trace: ConvergenceTrace<T>,
    pub gmm: Gmm<T>,
    /// per-node evidence vectors in network node order
    pub evidence: Vec<Vec<T>>,
    pub outer_iterations: usize,
}

/// Averaged responsibilities of one gene's non-missing transformed values.
fn gene_evidence<T: Real>(gmm: &Gmm<T>, values: &[T], k: usize) -> Vec<T> {
    let mut acc = vec![T::zero(); k];
    for &v in values {
        for (a, r) in acc.iter_mut().zip(responsibilities(gmm, v)) {
            *a += r;
        }
    }
    let n = T::from_count(values.len());
    for a in &mut acc {
        *a /= n;
    }
    acc
}

/// Full discretize-and-infer pipeline over a co-expression network.
///
/// Pools every non-missing value of the matrix for the initial mixture fit,
/// computes per-gene evidence as averaged responsibilities, builds the
/// spin-coupled factor graph and runs LBP. The outer loop re-estimates the
/// mixture (per [`GmmUpdate`]) and repeats until the largest belief change
/// drops below `outer_tol`.
pub fn discretize_and_infer<T: Real>(
    matrix: &ExpressionMatrix<T>,
    net: &CoexpressionNetwork<T>,
    cfg: &InferConfig<T>,
) -> Result<FgnResult<T>, FgnError> {
    let k = cfg.n_states;
    // transformed per-node observation lists, network node order
    let mut node_values: Vec<Vec<T>> = Vec::with_capacity(net.nodes.len());
    for gene in &net.nodes {
        let gi = matrix
            .gene_index(gene)
            .ok_or_else(|| FgnError::NodeNotInMatrix(gene.to_string()))?;
        let vals: Vec<T> = matrix
            .gene_profile(gi)
            .iter()
            .flatten()
            .map(|&v| cfg.transform.apply(v))
            .collect();
        if vals.is_empty() {
            return Err(FgnError::MissingEvidence(gene.to_string()));
        }
        node_values.push(vals);
    }
    let pooled: Vec<T> = (0..matrix.n_genes())
        .flat_map(|gi| {
            matrix
                .gene_profile(gi)
                .iter()
                .flatten()
                .map(|&v| cfg.transform.apply(v))
                .collect::<Vec<_>>()
        })
        .collect();

    let (mut gmm, _) = fit_gmm(&pooled, k, &cfg.em)?;

    let mut prev_beliefs: Option<Vec<T>> = None;
    let mut outer_iterations = 0;
    loop {
        outer_iterations += 1;
        let evidence_map: BTreeMap<GeneId, Vec<T>> = net
            .nodes
            .iter()
            .zip(&node_values)
            .map(|(g, vals)| (g.clone(), gene_evidence(&gmm, vals, k)))
            .collect();
        let graph = build_factor_graph(net, &evidence_map, cfg.coupling, k)?;
        let (marginals, trace) = run_lbp(&graph, &cfg.lbp);

        let flat = marginals.flatten();
        let settled = prev_beliefs
            .as_ref()
            .map(|prev| {
                flat.iter()
                    .zip(prev)
                    .map(|(a, b)| (*a - *b).abs())
                    .fold(T::zero(), T::max)
                    < cfg.outer_tol
            })
            .unwrap_or(false);
        if settled || outer_iterations >= cfg.outer_max_iter {
            let evidence = net
                .nodes
                .iter()
                .map(|g| evidence_map[g].clone())
                .collect();
            return Ok(FgnResult {
                marginals,
                trace,
                gmm,
                evidence,
                outer_iterations,
            });
        }
        prev_beliefs = Some(flat);

        gmm = match cfg.gmm_update {
            GmmUpdate::RawData => fit_gmm(&pooled, k, &cfg.em)?.0,
            GmmUpdate::Beliefs => {
                reestimate_from_beliefs(&gmm, &node_values, &marginals, cfg.em.variance_floor)
            }
        };
    }
}

/// One M-step with the LBP belief acting as each gene's state prior: for
/// observation v of gene g, membership ∝ belief_g(k) · N(v; μ_k, σ²_k).
fn reestimate_from_beliefs<T: Real>(
    gmm: &Gmm<T>,
    node_values: &[Vec<T>],
    beliefs: &Marginals<T>,
    variance_floor: T,
) -> Gmm<T> {
    let k = gmm.n_components();
    let half = T::c(0.5);
    let mut nk = vec![T::zero(); k];
    let mut sum = vec![T::zero(); k];
    let mut sq = vec![T::zero(); k];
    let mut total = T::zero();
    for (values, belief) in node_values.iter().zip(&beliefs.per_variable) {
        for &v in values {
            let mut resp: Vec<T> = (0..k)
                .map(|j| {
                    let d = v - gmm.means[j];
                    let log_n = -half * (gmm.variances[j].ln() + d * d / gmm.variances[j]);
                    belief[j] * log_n.exp()
                })
                .collect();
            let z = resp.iter().copied().sum::<T>();
            if z <= T::zero() {
                continue;
            }
            for r in &mut resp {
                *r /= z;
            }
            for j in 0..k {
                nk[j] += resp[j];
                sum[j] += resp[j] * v;
                sq[j] += resp[j] * v * v;
            }
            total += T::one();
        }
    }
    let mut out = gmm.clone();
    for j in 0..k {
        if nk[j] <= T::c(1e-12) {
            out.weights[j] = T::c(1e-12);
            continue;
        }
        let mu = sum[j] / nk[j];
        out.means[j] = mu;
        out.variances[j] = (sq[j] / nk[j] - mu * mu).max(variance_floor);
        out.weights[j] = nk[j] / total;
    }
    let wsum = out.weights.iter().copied().sum::<T>();
    for w in &mut out.weights {
        *w /= wsum;
    }
    // keep component index == state index
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| out.means[a].partial_cmp(&out.means[b]).expect("finite"));
    Gmm {
        weights: order.iter().map(|&i| out.weights[i]).collect(),
        means: order.iter().map(|&i| out.means[i]).collect(),
        variances: order.iter().map(|&i| out.variances[i]).collect(),
    }
}

/// Figure-of-merit between inferred marginals and observed state
/// proportions: both flattened to length `variables * states`, compared by
/// Pearson correlation with its two-sided p-value. Returns `(r, p, n)`.
pub fn evaluate_marginals<T: Real>(
    marginals: &Marginals<T>,
    observed: &[Vec<T>],
) -> Result<(T, T, usize), FgnError> {
    if marginals.per_variable.len() != observed.len()
        || marginals
            .per_variable
            .iter()
            .zip(observed)
            .any(|(m, o)| m.len() != o.len())
    {
        return Err(FgnError::VariableMismatch);
    }
    let x = marginals.flatten();
    let y: Vec<T> = observed.iter().flatten().copied().collect();
    let n = x.len();
    let r = pearson_correlation(&x, &y)?;
    let p = correlation_pvalue(r, n)?;
    Ok((r, p, n))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::{parse_edge_list, parse_expression_table, Delimiter, EdgeList};

    fn matrix(text: &str) -> ExpressionMatrix<f64> {
        parse_expression_table(text, Delimiter::Comma).unwrap()
    }

    fn bimodal_matrix(genes: usize) -> ExpressionMatrix<f64> {
        // half the genes strongly up, half strongly down, mild wobble
        let mut text = String::from("gene,s1,s2,s3,s4\n");
        for g in 0..genes {
            let base: f64 = if g % 2 == 0 { 4.0 } else { -4.0 };
            let wobble = 1.0 + 0.02 * (g as f64);
            text.push_str(&format!(
                "g{g},{:.4},{:.4},{:.4},{:.4}\n",
                base * wobble,
                base,
                base * (2.0 - wobble),
                base
            ));
        }
        matrix(&text)
    }

    #[test]
    fn no_edges_marginals_equal_averaged_responsibilities() {
        let m = bimodal_matrix(6);
        let net = CoexpressionNetwork {
            nodes: m.genes().to_vec(),
            edges: EdgeList::default(),
        };
        let cfg = InferConfig::<f64>::default();
        let res = discretize_and_infer(&m, &net, &cfg).unwrap();
        for (marginal, evidence) in res.marginals.per_variable.iter().zip(&res.evidence) {
            for (a, b) in marginal.iter().zip(evidence) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn shapes_and_normalization_for_k2_and_k3() {
        let m = bimodal_matrix(8);
        let edges: EdgeList<f64> = parse_edge_list("g0\tg2\t0.9\ng1\tg3\t0.8\ng0\tg4\t0.7\n").unwrap();
        let net = CoexpressionNetwork::from_edge_list(edges, m.genes());
        for k in [2usize, 3] {
            let cfg = InferConfig {
                n_states: k,
                ..InferConfig::default()
            };
            let res = discretize_and_infer(&m, &net, &cfg).unwrap();
            assert_eq!(res.marginals.per_variable.len(), 8);
            for marginal in &res.marginals.per_variable {
                assert_eq!(marginal.len(), k);
                let s: f64 = marginal.iter().sum();
                assert!((s - 1.0).abs() < 1e-9);
            }
            assert_eq!(res.gmm.n_components(), k);
            for w in res.gmm.means.windows(2) {
                assert!(w[1] >= w[0]);
            }
        }
    }

    #[test]
    fn missing_node_is_an_error() {
        let m = bimodal_matrix(2);
        let edges: EdgeList<f64> = parse_edge_list("g0\tnope\t0.5\n").unwrap();
        let net = CoexpressionNetwork::from_edge_list(edges, &[]);
        let cfg = InferConfig::<f64>::default();
        assert_eq!(
            discretize_and_infer(&m, &net, &cfg).unwrap_err(),
            FgnError::NodeNotInMatrix("nope".into())
        );
    }

    #[test]
    fn evaluate_is_perfect_on_identical_vectors() {
        let marginals: Marginals<f64> = Marginals {
            per_variable: vec![vec![0.3, 0.7], vec![0.8, 0.2], vec![0.5, 0.5]],
        };
        let observed = vec![vec![0.3, 0.7], vec![0.8, 0.2], vec![0.5, 0.5]];
        let (r, p, n) = evaluate_marginals(&marginals, &observed).unwrap();
        assert_eq!(n, 6);
        assert!((r - 1.0).abs() < 1e-12);
        assert_eq!(p, 0.0);
    }

    #[test]
    fn evaluate_reversed_is_anticorrelated() {
        let marginals: Marginals<f64> = Marginals {
            per_variable: vec![vec![0.3, 0.7], vec![0.8, 0.2]],
        };
        let observed = vec![vec![0.7, 0.3], vec![0.2, 0.8]];
        let (r, _, _) = evaluate_marginals(&marginals, &observed).unwrap();
        assert!((r + 1.0).abs() < 1e-12);
    }

    #[test]
    fn evaluate_rejects_mismatched_shapes() {
        let marginals: Marginals<f64> = Marginals {
            per_variable: vec![vec![0.3, 0.7]],
        };
        assert_eq!(
            evaluate_marginals(&marginals, &[vec![0.5, 0.25, 0.25]]).unwrap_err(),
            FgnError::VariableMismatch
        );
    }

    #[test]
    fn self_consistent_evidence_scores_high() {
        // evidence equals observed proportions; with mild coupling the
        // marginals stay close to the evidence, so r >= 0.99
        let m = bimodal_matrix(10);
        let edges: EdgeList<f64> =
            parse_edge_list("g0\tg2\t0.9\ng2\tg4\t0.85\ng1\tg3\t0.9\ng3\tg5\t0.8\n").unwrap();
        let net = CoexpressionNetwork::from_edge_list(edges, m.genes());
        let cfg = InferConfig::<f64>::default();
        let res = discretize_and_infer(&m, &net, &cfg).unwrap();
        let (r, _, n) = evaluate_marginals(&res.marginals, &res.evidence).unwrap();
        assert_eq!(n, 20);
        assert!(r >= 0.99, "r = {r}");
    }
}
