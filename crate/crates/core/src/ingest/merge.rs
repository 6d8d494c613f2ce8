//! Merging the separately shipped up- and down-regulation tables into one
//! signed matrix.

use std::collections::HashSet;

use super::types::{ExpressionMatrix, GeneId};
use super::IngestError;
use crate::num::Real;

/// Merge up- and down-regulation fold-change tables into a single signed
/// matrix: values from `down` are negated, values from `up` kept as-is.
///
/// Both tables must cover the same sample set (the down file carries
/// positive fold magnitudes). A gene may carry a value in at most one of
/// the two tables per sample.
pub fn merge_regulation_files<T: Real>(
    up: &ExpressionMatrix<T>,
    down: &ExpressionMatrix<T>,
) -> Result<ExpressionMatrix<T>, IngestError> {
    let up_ids: Vec<&str> = up.samples().iter().map(|s| s.sample_id.as_str()).collect();
    let down_ids: HashSet<&str> = down.samples().iter().map(|s| s.sample_id.as_str()).collect();
    if up_ids.len() != down_ids.len() || !up_ids.iter().all(|id| down_ids.contains(id)) {
        return Err(IngestError::SampleMismatch);
    }
    // down columns permuted into the up table's sample order
    let down_col: Vec<usize> = up_ids
        .iter()
        .map(|id| {
            down.samples()
                .iter()
                .position(|s| s.sample_id == *id)
                .expect("sample sets already matched")
        })
        .collect();

    let mut genes: Vec<GeneId> = up.genes().to_vec();
    for g in down.genes() {
        if !genes.contains(g) {
            genes.push(g.clone());
        }
    }

    let n = up.n_samples();
    let mut values = vec![None; genes.len() * n];
    for (gi, gene) in genes.iter().enumerate() {
        let up_row = up.gene_index(gene);
        let down_row = down.gene_index(gene);
        for si in 0..n {
            let u = up_row.and_then(|r| up.value(r, si));
            let d = down_row.and_then(|r| down.value(r, down_col[si]));
            values[gi * n + si] = match (u, d) {
                (Some(_), Some(_)) => {
                    return Err(IngestError::ConflictingRegulation {
                        gene: gene.to_string(),
                        sample: up.samples()[si].sample_id.clone(),
                    })
                }
                (Some(v), None) => Some(v),
                (None, Some(v)) => Some(-v),
                (None, None) => None,
            };
        }
    }
    ExpressionMatrix::new(genes, up.samples().to_vec(), values)
}
