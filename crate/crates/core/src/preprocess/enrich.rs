//! Hypergeometric over-representation test with Benjamini-Hochberg
//! correction.

use std::collections::BTreeSet;

use super::PreprocessError;
use crate::ingest::{GeneId, PathwayDb};
use crate::num::Real;
use crate::special::ln_choose;

/// Enrichment of one pathway against the query set.
#[derive(Debug, Clone, PartialEq)]
pub struct EnrichmentResult<T: Real> {
    pub pathway_id: String,
    pub description: String,
    pub overlap_count: usize,
    pub pathway_size: usize,
    pub query_size: usize,
    pub universe_size: usize,
    pub p_value: T,
    pub adjusted_p: T,
}

/// Upper-tail hypergeometric probability P(X >= k) of drawing `k` or more
/// marked items in `n` draws without replacement from a population of `pop`
/// items of which `marked` are marked.
pub fn hypergeometric_tail<T: Real>(pop: u64, marked: u64, n: u64, k: u64) -> T {
    debug_assert!(marked <= pop && n <= pop);
    let hi = marked.min(n);
    if k > hi {
        return T::zero();
    }
    let ln_denom: T = ln_choose(pop, n);
    let mut p = T::zero();
    for i in k..=hi {
        // term is zero when n - i exceeds the unmarked count
        if n - i > pop - marked {
            continue;
        }
        let ln_term =
            ln_choose::<T>(marked, i) + ln_choose::<T>(pop - marked, n - i) - ln_denom;
        p += ln_term.exp();
    }
    p.min(T::one())
}

/// Benjamini-Hochberg adjusted p-values, returned in input order.
pub fn benjamini_hochberg<T: Real>(pvals: &[T]) -> Vec<T> {
    let m = pvals.len();
    if m == 0 {
        return Vec::new();
    }
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| pvals[a].partial_cmp(&pvals[b]).expect("finite p-values"));
    let mut adjusted = vec![T::zero(); m];
    let mut running_min = T::one();
    for rank in (0..m).rev() {
        let idx = order[rank];
        let scaled = pvals[idx] * T::from_count(m) / T::from_count(rank + 1);
        running_min = running_min.min(scaled).min(T::one());
        adjusted[idx] = running_min;
    }
    adjusted
}

/// Test every pathway for over-representation of `query` within `universe`.
///
/// Pathway gene sets are intersected with the universe first; every pathway
/// with a nonempty intersection counts as tested for the BH correction, and
/// pathways with zero overlap are omitted from the returned results.
/// Results are sorted by ascending p-value (then pathway id).
pub fn enrich<T: Real>(
    query: &BTreeSet<GeneId>,
    db: &PathwayDb,
    universe: &BTreeSet<GeneId>,
) -> Result<Vec<EnrichmentResult<T>>, PreprocessError> {
    if universe.is_empty() {
        return Err(PreprocessError::EmptyUniverse);
    }
    let query: BTreeSet<&GeneId> = query.iter().filter(|g| universe.contains(*g)).collect();
    let mut tested = Vec::new();
    for (id, (desc, genes)) in &db.pathways {
        let in_universe: Vec<&GeneId> = genes.iter().filter(|g| universe.contains(*g)).collect();
        if in_universe.is_empty() {
            continue;
        }
        let overlap = in_universe.iter().filter(|g| query.contains(**g)).count();
        let p: T = hypergeometric_tail(
            universe.len() as u64,
            in_universe.len() as u64,
            query.len() as u64,
            overlap as u64,
        );
        tested.push((id.clone(), desc.clone(), in_universe.len(), overlap, p));
    }

    let pvals: Vec<T> = tested.iter().map(|t| t.4).collect();
    let adjusted = benjamini_hochberg(&pvals);

    let mut results: Vec<EnrichmentResult<T>> = tested
        .into_iter()
        .zip(adjusted)
        .filter(|((_, _, _, overlap, _), _)| *overlap >= 1)
        .map(|((id, desc, size, overlap, p), adj)| EnrichmentResult {
            pathway_id: id,
            description: desc,
            overlap_count: overlap,
            pathway_size: size,
            query_size: query.len(),
            universe_size: universe.len(),
            p_value: p,
            adjusted_p: adj,
        })
        .collect();
    results.sort_by(|a, b| {
        a.p_value
            .partial_cmp(&b.p_value)
            .expect("finite p-values")
            .then_with(|| a.pathway_id.cmp(&b.pathway_id))
    });
    Ok(results)
}
