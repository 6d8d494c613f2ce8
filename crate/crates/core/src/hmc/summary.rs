//! Posterior summarization over pooled post-warmup draws.

use super::diagnostics::{effective_sample_size, split_rhat};
use super::sample::ChainResult;
use super::HmcError;
use crate::num::Real;

/// One summary row; `rhat`/`ess` are NaN when the diagnostic is undefined
/// (degenerate draws).
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow<T: Real> {
    pub name: String,
    pub median: T,
    pub mean: T,
    pub stddev: T,
    pub rhat: T,
    pub ess: T,
}

/// Per-parameter posterior statistics, rows in the caller's name order.
#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorSummary<T: Real> {
    pub rows: Vec<SummaryRow<T>>,
}

/// Midpoint-convention sample median.
fn median<T: Real>(values: &mut [T]) -> T {
    values.sort_by(|a, b| a.partial_cmp(b).expect("finite draws"));
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        (values[n / 2 - 1] + values[n / 2]) * T::c(0.5)
    }
}

/// Summarize pooled post-warmup draws: median (midpoint convention), mean,
/// standard deviation (n-1 denominator), split R-hat and effective sample
/// size per parameter. Row order follows `names`, which must match the
/// draw dimension.
pub fn summarize<T: Real>(
    chains: &[ChainResult<T>],
    names: &[String],
) -> Result<PosteriorSummary<T>, HmcError> {
    if chains.is_empty() || chains.iter().all(|c| c.draws.is_empty()) {
        return Err(HmcError::EmptyChains);
    }
    let dim = chains[0].draws[0].len();
    if names.len() != dim {
        return Err(HmcError::NameMismatch);
    }
    let mut rows = Vec::with_capacity(dim);
    for (param, name) in names.iter().enumerate() {
        let per_chain: Vec<Vec<T>> = chains.iter().map(|c| c.column(param)).collect();
        let mut pooled: Vec<T> = per_chain.iter().flatten().copied().collect();
        let n = T::from_count(pooled.len());
        let mean = pooled.iter().copied().sum::<T>() / n;
        let stddev = if pooled.len() > 1 {
            (pooled
                .iter()
                .map(|&x| (x - mean) * (x - mean))
                .sum::<T>()
                / (n - T::one()))
            .sqrt()
        } else {
            T::zero()
        };
        let rhat = split_rhat(&per_chain).unwrap_or(T::nan());
        let ess = effective_sample_size(&per_chain).unwrap_or(T::nan());
        rows.push(SummaryRow {
            name: name.clone(),
            median: median(&mut pooled),
            mean,
            stddev,
            rhat,
            ess,
        });
    }
    Ok(PosteriorSummary { rows })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chain_of(draws: Vec<Vec<f64>>) -> ChainResult<f64> {
        ChainResult {
            draws,
            accept_rate: 1.0,
            divergence_count: 0,
            seed_used: 0,
            final_step_size: 0.1,
        }
    }

    #[test]
    fn known_moments() {
        let chains = vec![chain_of(
            [1.0, 2.0, 3.0, 4.0, 5.0].iter().map(|&v| vec![v]).collect(),
        )];
        let s = summarize(&chains, &["x".to_string()]).unwrap();
        assert_eq!(s.rows[0].median, 3.0);
        assert_eq!(s.rows[0].mean, 3.0);
        assert!((s.rows[0].stddev - 2.5f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn even_count_median_is_midpoint() {
        let chains = vec![chain_of(
            [1.0, 2.0, 3.0, 4.0].iter().map(|&v| vec![v]).collect(),
        )];
        let s = summarize(&chains, &["x".to_string()]).unwrap();
        assert_eq!(s.rows[0].median, 2.5);
    }

    #[test]
    fn row_order_follows_names() {
        let chains = vec![chain_of(vec![vec![1.0, 10.0], vec![2.0, 20.0], vec![3.0, 30.0], vec![4.0, 40.0]])];
        let names = vec!["first".to_string(), "second".to_string()];
        let s = summarize(&chains, &names).unwrap();
        assert_eq!(s.rows[0].name, "first");
        assert_eq!(s.rows[1].name, "second");
        assert_eq!(s.rows[1].mean, 25.0);
    }

    #[test]
    fn empty_and_mismatched_inputs_rejected() {
        assert_eq!(
            summarize::<f64>(&[], &[]).unwrap_err(),
            HmcError::EmptyChains
        );
        let chains = vec![chain_of(vec![vec![1.0]])];
        assert_eq!(
            summarize(&chains, &[]).unwrap_err(),
            HmcError::NameMismatch
        );
    }

    #[test]
    fn median_stays_inside_draw_range() {
        let chains = vec![chain_of(
            [2.0, -1.0, 7.5, 3.0, 0.0, 1.0].iter().map(|&v| vec![v]).collect(),
        )];
        let s = summarize(&chains, &["x".to_string()]).unwrap();
        assert!(s.rows[0].median >= -1.0 && s.rows[0].median <= 7.5);
    }
}
