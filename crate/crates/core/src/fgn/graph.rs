//! Discrete factor graph over gene state variables.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::FgnError;
use crate::ingest::GeneId;
use crate::num::Real;
use crate::preprocess::CoexpressionNetwork;

/// Discrete variable: one gene with `n_states` logical states.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Variable {
    pub gene: GeneId,
    pub n_states: usize,
}

/// Pairwise potential between variables `i` and `j`; `table` is row-major
/// over `(x_i, x_j)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairwiseFactor<T: Real> {
    pub i: usize,
    pub j: usize,
    pub table: Vec<T>,
}

impl<T: Real> PairwiseFactor<T> {
    pub fn entry(&self, xi: usize, xj: usize, k: usize) -> T {
        self.table[xi * k + xj]
    }
}

/// Bipartite variable/factor structure with per-variable evidence
/// potentials and pairwise coupling tables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FactorGraph<T: Real> {
    variables: Vec<Variable>,
    unary: Vec<Vec<T>>,
    pairwise: Vec<PairwiseFactor<T>>,
}

impl<T: Real> FactorGraph<T> {
    pub fn new(
        variables: Vec<Variable>,
        unary: Vec<Vec<T>>,
        pairwise: Vec<PairwiseFactor<T>>,
    ) -> Result<Self, FgnError> {
        if unary.len() != variables.len() {
            return Err(FgnError::InvalidGraph(
                "one unary factor per variable required".into(),
            ));
        }
        for (v, u) in variables.iter().zip(&unary) {
            if u.len() != v.n_states {
                return Err(FgnError::InvalidGraph(format!(
                    "unary factor for `{}` has wrong arity",
                    v.gene
                )));
            }
            check_potential(u)?;
        }
        for f in &pairwise {
            let (vi, vj) = match (variables.get(f.i), variables.get(f.j)) {
                (Some(a), Some(b)) => (a, b),
                _ => {
                    return Err(FgnError::InvalidGraph(
                        "pairwise factor references undeclared variable".into(),
                    ))
                }
            };
            if f.i == f.j {
                return Err(FgnError::InvalidGraph("pairwise self-factor".into()));
            }
            if f.table.len() != vi.n_states * vj.n_states {
                return Err(FgnError::InvalidGraph(
                    "pairwise table has wrong arity".into(),
                ));
            }
            check_potential(&f.table)?;
        }
        Ok(FactorGraph {
            variables,
            unary,
            pairwise,
        })
    }

    pub fn n_variables(&self) -> usize {
        self.variables.len()
    }

    pub fn variables(&self) -> &[Variable] {
        &self.variables
    }

    pub fn unary(&self) -> &[Vec<T>] {
        &self.unary
    }

    pub fn pairwise(&self) -> &[PairwiseFactor<T>] {
        &self.pairwise
    }

    pub fn to_json(&self) -> String
    where
        T: Serialize,
    {
        serde_json::to_string_pretty(self).expect("graph serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, FgnError>
    where
        T: for<'de> Deserialize<'de>,
    {
        let graph: FactorGraph<T> =
            serde_json::from_str(text).map_err(|e| FgnError::InvalidGraph(e.to_string()))?;
        FactorGraph::new(graph.variables, graph.unary, graph.pairwise)
    }
}

fn check_potential<T: Real>(table: &[T]) -> Result<(), FgnError> {
    if table.iter().any(|&v| !v.is_finite() || v < T::zero()) {
        return Err(FgnError::InvalidGraph(
            "potential entries must be finite and nonnegative".into(),
        ));
    }
    if table.iter().all(|&v| v == T::zero()) {
        return Err(FgnError::InvalidGraph(
            "potential must have a strictly positive entry".into(),
        ));
    }
    Ok(())
}

/// Centered spin value of state `x` among `k` states: evenly spaced over
/// `[-1, +1]`, so k = 2 gives the Ising spins {-1, +1}.
pub fn state_spin<T: Real>(x: usize, k: usize) -> T {
    debug_assert!(k >= 2);
    T::c(2.0) * T::from_count(x) / T::from_count(k - 1) - T::one()
}

/// Build the factor graph for a co-expression network: one variable per
/// node, its evidence vector as the unary potential, and for every edge
/// `(i, j, r)` the coupling table
/// `psi(x_i, x_j) = exp(coupling * r * s(x_i) * s(x_j))`
/// over centered spin values `s`. Positive correlation favors equal states.
pub fn build_factor_graph<T: Real>(
    net: &CoexpressionNetwork<T>,
    evidence: &BTreeMap<GeneId, Vec<T>>,
    coupling: T,
    k: usize,
) -> Result<FactorGraph<T>, FgnError> {
    if k < 2 {
        return Err(FgnError::BadComponentCount);
    }
    if !(coupling > T::zero()) {
        return Err(FgnError::InvalidGraph("coupling must be positive".into()));
    }
    let mut variables = Vec::with_capacity(net.nodes.len());
    let mut unary = Vec::with_capacity(net.nodes.len());
    for gene in &net.nodes {
        let e = evidence
            .get(gene)
            .ok_or_else(|| FgnError::MissingEvidence(gene.to_string()))?;
        if e.len() != k {
            return Err(FgnError::InvalidGraph(format!(
                "evidence for `{gene}` has wrong arity"
            )));
        }
        variables.push(Variable {
            gene: gene.clone(),
            n_states: k,
        });
        unary.push(e.clone());
    }
    let index: BTreeMap<&GeneId, usize> =
        net.nodes.iter().enumerate().map(|(i, g)| (g, i)).collect();
    let mut pairwise = Vec::with_capacity(net.edges.len());
    for e in net.edges.edges() {
        let (i, j) = (index[&e.a], index[&e.b]);
        let mut table = Vec::with_capacity(k * k);
        for xi in 0..k {
            for xj in 0..k {
                let s = state_spin::<T>(xi, k) * state_spin::<T>(xj, k);
                table.push((coupling * e.weight * s).exp());
            }
        }
        pairwise.push(PairwiseFactor { i, j, table });
    }
    FactorGraph::new(variables, unary, pairwise)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::{parse_edge_list, EdgeList};

    fn gene(s: &str) -> GeneId {
        GeneId::new(s).unwrap()
    }

    fn net_of(edges: &str, extra: &[&str]) -> CoexpressionNetwork<f64> {
        let el: EdgeList<f64> = parse_edge_list(edges).unwrap();
        let extra: Vec<GeneId> = extra.iter().map(|s| gene(s)).collect();
        CoexpressionNetwork::from_edge_list(el, &extra)
    }

    #[test]
    fn single_node_graph_has_only_unary() {
        let net = net_of("", &["A"]);
        let mut ev = BTreeMap::new();
        ev.insert(gene("A"), vec![0.3, 0.7]);
        let g = build_factor_graph(&net, &ev, 1.0, 2).unwrap();
        assert_eq!(g.n_variables(), 1);
        assert!(g.pairwise().is_empty());
        assert_eq!(g.unary()[0], vec![0.3, 0.7]);
    }

    #[test]
    fn zero_weight_edge_gives_flat_table() {
        let net = net_of("A\tB\t0.0\n", &[]);
        let mut ev = BTreeMap::new();
        ev.insert(gene("A"), vec![0.5, 0.5]);
        ev.insert(gene("B"), vec![0.5, 0.5]);
        let g = build_factor_graph(&net, &ev, 1.0, 2).unwrap();
        assert_eq!(g.pairwise()[0].table, vec![1.0; 4]);
    }

    #[test]
    fn unit_correlation_unit_coupling_table() {
        let net = net_of("A\tB\t1.0\n", &[]);
        let mut ev = BTreeMap::new();
        ev.insert(gene("A"), vec![0.5, 0.5]);
        ev.insert(gene("B"), vec![0.5, 0.5]);
        let g = build_factor_graph(&net, &ev, 1.0, 2).unwrap();
        let e = std::f64::consts::E;
        let t = &g.pairwise()[0].table;
        assert!((t[0] - e).abs() < 1e-15);
        assert!((t[1] - 1.0 / e).abs() < 1e-15);
        assert!((t[2] - 1.0 / e).abs() < 1e-15);
        assert!((t[3] - e).abs() < 1e-15);
    }

    #[test]
    fn missing_evidence_is_an_error() {
        let net = net_of("A\tB\t0.5\n", &[]);
        let mut ev = BTreeMap::new();
        ev.insert(gene("A"), vec![0.5, 0.5]);
        assert_eq!(
            build_factor_graph(&net, &ev, 1.0, 2).unwrap_err(),
            FgnError::MissingEvidence("B".into())
        );
    }

    #[test]
    fn json_round_trip() {
        let net = net_of("A\tB\t0.8\n", &["C"]);
        let mut ev = BTreeMap::new();
        ev.insert(gene("A"), vec![0.3, 0.7]);
        ev.insert(gene("B"), vec![0.6, 0.4]);
        ev.insert(gene("C"), vec![0.5, 0.5]);
        let g = build_factor_graph(&net, &ev, 1.5, 2).unwrap();
        let parsed = FactorGraph::<f64>::from_json(&g.to_json()).unwrap();
        assert_eq!(parsed, g);
    }

    #[test]
    fn spins_are_centered_and_evenly_spaced() {
        assert_eq!(state_spin::<f64>(0, 2), -1.0);
        assert_eq!(state_spin::<f64>(1, 2), 1.0);
        assert_eq!(state_spin::<f64>(1, 3), 0.0);
    }
}
