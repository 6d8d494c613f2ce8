//! Significance filtering, correlation, hierarchical clustering, pathway
//! enrichment and co-expression network construction.

mod cluster;
mod enrich;
mod network;
mod stats;

pub use cluster::{hierarchical_cluster, Dendrogram, Merge};
pub use enrich::{benjamini_hochberg, enrich, hypergeometric_tail, EnrichmentResult};
pub use network::{build_coexpression_network, CoexpressionNetwork};
pub use stats::{complete_pairs, correlation_pvalue, pearson_correlation, ProfileTransform};

use thiserror::Error;

use crate::ingest::{ExpressionMatrix, GeneId};
use crate::num::Real;

#[derive(Debug, Error, PartialEq)]
pub enum PreprocessError {
    #[error("significance cutoff must exceed 1")]
    BadCutoff,
    #[error("correlation undefined for a constant input vector")]
    UndefinedCorrelation,
    #[error("correlation inputs must have equal length >= 2")]
    BadVectors,
    #[error("gene `{0}` has fewer than 2 usable values")]
    InsufficientData(String),
    #[error("universe is empty")]
    EmptyUniverse,
    #[error("gene `{0}` not present in the matrix")]
    GeneNotFound(String),
    #[error("correlation threshold must lie in (0, 1]")]
    BadThreshold,
    #[error("need at least 2 genes")]
    TooFewGenes,
}

/// Genes whose absolute fold change reaches `cutoff` in at least one sample,
/// input order preserved. Missing entries never count.
pub fn significant_genes<T: Real>(
    matrix: &ExpressionMatrix<T>,
    cutoff: T,
) -> Result<Vec<GeneId>, PreprocessError> {
    if !(cutoff > T::one()) {
        return Err(PreprocessError::BadCutoff);
    }
    Ok(matrix
        .genes()
        .iter()
        .enumerate()
        .filter(|(gi, _)| {
            matrix
                .gene_profile(*gi)
                .iter()
                .flatten()
                .any(|v| v.abs() >= cutoff)
        })
        .map(|(_, g)| g.clone())
        .collect())
}
