//! Pearson co-expression network construction.

use std::collections::HashMap;

use super::stats::{complete_pairs, pearson_correlation, ProfileTransform};
use super::PreprocessError;
use crate::ingest::{Edge, EdgeList, ExpressionMatrix, GeneId};
use crate::num::Real;

/// Undirected gene-gene network with correlation weights.
#[derive(Debug, Clone, PartialEq)]
pub struct CoexpressionNetwork<T: Real> {
    pub nodes: Vec<GeneId>,
    pub edges: EdgeList<T>,
}

impl<T: Real> CoexpressionNetwork<T> {
    /// Wrap an ingested edge list; nodes are the edge endpoints plus any
    /// extra isolated nodes given.
    pub fn from_edge_list(edges: EdgeList<T>, extra_nodes: &[GeneId]) -> Self {
        let mut nodes: Vec<GeneId> = Vec::new();
        for e in edges.edges() {
            if !nodes.contains(&e.a) {
                nodes.push(e.a.clone());
            }
            if !nodes.contains(&e.b) {
                nodes.push(e.b.clone());
            }
        }
        for g in extra_nodes {
            if !nodes.contains(g) {
                nodes.push(g.clone());
            }
        }
        CoexpressionNetwork { nodes, edges }
    }

    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    /// Number of connected components.
    pub fn connected_components(&self) -> usize {
        let index: HashMap<&GeneId, usize> =
            self.nodes.iter().enumerate().map(|(i, g)| (g, i)).collect();
        let mut parent: Vec<usize> = (0..self.nodes.len()).collect();
        fn find(parent: &mut [usize], mut i: usize) -> usize {
            while parent[i] != i {
                parent[i] = parent[parent[i]];
                i = parent[i];
            }
            i
        }
        for e in self.edges.edges() {
            let (a, b) = (index[&e.a], index[&e.b]);
            let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
            if ra != rb {
                parent[ra] = rb;
            }
        }
        (0..self.nodes.len())
            .filter(|&i| find(&mut parent, i) == i)
            .count()
    }
}

/// Build the co-expression network over `genes`: an edge joins genes i and j
/// iff `|r| >= threshold` over their complete sample pairs, with weight `r`.
///
/// Pairs with an undefined correlation (constant profile or fewer than two
/// complete pairs) are skipped; the second element of the return value
/// counts them so callers can warn.
pub fn build_coexpression_network<T: Real>(
    matrix: &ExpressionMatrix<T>,
    genes: &[GeneId],
    threshold: T,
    transform: ProfileTransform,
) -> Result<(CoexpressionNetwork<T>, usize), PreprocessError> {
    if !(threshold > T::zero() && threshold <= T::one()) {
        return Err(PreprocessError::BadThreshold);
    }
    let mut profiles = Vec::with_capacity(genes.len());
    for g in genes {
        let gi = matrix
            .gene_index(g)
            .ok_or_else(|| PreprocessError::GeneNotFound(g.to_string()))?;
        profiles.push(
            matrix
                .gene_profile(gi)
                .iter()
                .map(|v| v.map(|v| transform.apply(v)))
                .collect::<Vec<_>>(),
        );
    }
    let mut edges = Vec::new();
    let mut skipped = 0usize;
    for i in 0..genes.len() {
        for j in (i + 1)..genes.len() {
            let (x, y) = complete_pairs(&profiles[i], &profiles[j]);
            if x.len() < 2 {
                skipped += 1;
                continue;
            }
            match pearson_correlation(&x, &y) {
                Ok(r) if r.abs() >= threshold => edges.push(Edge {
                    a: genes[i].clone(),
                    b: genes[j].clone(),
                    weight: r,
                }),
                Ok(_) => {}
                Err(PreprocessError::UndefinedCorrelation) => skipped += 1,
                Err(e) => return Err(e),
            }
        }
    }
    let edges = EdgeList::new(edges).expect("construction yields valid edges");
    Ok((
        CoexpressionNetwork {
            nodes: genes.to_vec(),
            edges,
        },
        skipped,
    ))
}
