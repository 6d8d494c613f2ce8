//! Agglomerative average-linkage clustering of expression profiles under
//! the dissimilarity d = 1 - r.

use std::collections::HashMap;

use super::stats::{complete_pairs, pearson_correlation, ProfileTransform};
use super::PreprocessError;
use crate::ingest::{ExpressionMatrix, GeneId};
use crate::num::Real;

/// One agglomeration step. Cluster indices follow the usual stepwise
/// convention: `0..leaves` are the leaves, `leaves + t` is the cluster
/// created by merge `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct Merge<T: Real> {
    pub left: usize,
    pub right: usize,
    pub height: T,
}

/// Stepwise dendrogram over a fixed leaf set.
#[derive(Debug, Clone, PartialEq)]
pub struct Dendrogram<T: Real> {
    pub leaves: Vec<GeneId>,
    pub merges: Vec<Merge<T>>,
}

impl<T: Real> Dendrogram<T> {
    /// Leaves in left-to-right display order.
    pub fn leaf_order(&self) -> Vec<GeneId> {
        if self.leaves.len() == 1 {
            return self.leaves.clone();
        }
        let root = self.leaves.len() + self.merges.len() - 1;
        let mut order = Vec::with_capacity(self.leaves.len());
        self.collect_leaves(root, &mut order);
        order
    }

    fn collect_leaves(&self, cluster: usize, out: &mut Vec<GeneId>) {
        if cluster < self.leaves.len() {
            out.push(self.leaves[cluster].clone());
        } else {
            let m = &self.merges[cluster - self.leaves.len()];
            self.collect_leaves(m.left, out);
            self.collect_leaves(m.right, out);
        }
    }

    /// Newick rendering with ultrametric branch lengths derived from the
    /// merge heights.
    pub fn to_newick(&self) -> String {
        if self.merges.is_empty() {
            return format!("{};", self.leaves[0]);
        }
        let root = self.leaves.len() + self.merges.len() - 1;
        let root_height = self.merges.last().expect("nonempty").height;
        format!("{};", self.newick_node(root, root_height))
    }

    fn cluster_height(&self, cluster: usize) -> T {
        if cluster < self.leaves.len() {
            T::zero()
        } else {
            self.merges[cluster - self.leaves.len()].height
        }
    }

    fn newick_node(&self, cluster: usize, _parent_height: T) -> String {
        if cluster < self.leaves.len() {
            return self.leaves[cluster].to_string();
        }
        let m = &self.merges[cluster - self.leaves.len()];
        let left = self.newick_node(m.left, m.height);
        let right = self.newick_node(m.right, m.height);
        format!(
            "({}:{},{}:{})",
            left,
            m.height - self.cluster_height(m.left),
            right,
            m.height - self.cluster_height(m.right)
        )
    }
}

/// Average-linkage (UPGMA) clustering of the given genes' expression
/// profiles. Dissimilarity between two genes is `1 - r` over their complete
/// sample pairs; ties merge the lexicographically lowest cluster pair.
pub fn hierarchical_cluster<T: Real>(
    matrix: &ExpressionMatrix<T>,
    genes: &[GeneId],
    transform: ProfileTransform,
) -> Result<Dendrogram<T>, PreprocessError> {
    if genes.len() < 2 {
        return Err(PreprocessError::TooFewGenes);
    }
    let mut profiles = Vec::with_capacity(genes.len());
    for g in genes {
        let gi = matrix
            .gene_index(g)
            .ok_or_else(|| PreprocessError::GeneNotFound(g.to_string()))?;
        let profile: Vec<Option<T>> = matrix
            .gene_profile(gi)
            .iter()
            .map(|v| v.map(|v| transform.apply(v)))
            .collect();
        if profile.iter().flatten().count() < 2 {
            return Err(PreprocessError::InsufficientData(g.to_string()));
        }
        profiles.push(profile);
    }

    let n = genes.len();
    let mut dist: HashMap<(usize, usize), T> = HashMap::new();
    for i in 0..n {
        for j in (i + 1)..n {
            let (x, y) = complete_pairs(&profiles[i], &profiles[j]);
            if x.len() < 2 {
                return Err(PreprocessError::InsufficientData(genes[j].to_string()));
            }
            let r = pearson_correlation(&x, &y)?;
            dist.insert((i, j), T::one() - r);
        }
    }

    let mut sizes: HashMap<usize, usize> = (0..n).map(|i| (i, 1)).collect();
    let mut active: Vec<usize> = (0..n).collect();
    let mut merges = Vec::with_capacity(n - 1);
    for step in 0..(n - 1) {
        // global minimum; ties resolved by the lowest (i, j) pair
        let mut best: Option<((usize, usize), T)> = None;
        for (ai, &i) in active.iter().enumerate() {
            for &j in &active[(ai + 1)..] {
                let d = dist[&(i.min(j), i.max(j))];
                match best {
                    Some((_, bd)) if d >= bd => {}
                    _ => best = Some(((i, j), d)),
                }
            }
        }
        let ((i, j), height) = best.expect("at least two active clusters");
        let new = n + step;
        let (si, sj) = (sizes[&i], sizes[&j]);
        for &k in &active {
            if k == i || k == j {
                continue;
            }
            let dik = dist[&(i.min(k), i.max(k))];
            let djk = dist[&(j.min(k), j.max(k))];
            let merged = (T::from_count(si) * dik + T::from_count(sj) * djk)
                / T::from_count(si + sj);
            dist.insert((k.min(new), k.max(new)), merged);
        }
        sizes.insert(new, si + sj);
        active.retain(|&k| k != i && k != j);
        active.push(new);
        merges.push(Merge {
            left: i,
            right: j,
            height,
        });
    }

    Ok(Dendrogram {
        leaves: genes.to_vec(),
        merges,
    })
}
