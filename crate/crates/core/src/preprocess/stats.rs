//! Pearson correlation and its significance transform.

use super::PreprocessError;
use crate::num::Real;
use crate::special::student_t_two_sided;

/// How raw signed fold changes are mapped to an expression profile before
/// correlation or clustering.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ProfileTransform {
    /// Use the signed fold change as-is.
    Raw,
    /// `sign(v) * log2(|v|)`, symmetrizing up- and down-regulation
    /// magnitudes around zero.
    #[default]
    SignedLog2,
}

impl ProfileTransform {
    pub fn apply<T: Real>(self, v: T) -> T {
        match self {
            ProfileTransform::Raw => v,
            ProfileTransform::SignedLog2 => v.signum() * v.abs().log2(),
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "raw" => Some(ProfileTransform::Raw),
            "signed_log2" => Some(ProfileTransform::SignedLog2),
            _ => None,
        }
    }
}

/// Sample Pearson correlation coefficient of two equal-length vectors.
///
/// Summation order is fixed, so results are reproducible no matter how
/// callers parallelize over pairs.
pub fn pearson_correlation<T: Real>(x: &[T], y: &[T]) -> Result<T, PreprocessError> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(PreprocessError::BadVectors);
    }
    let n = T::from_count(x.len());
    let mean_x = x.iter().copied().sum::<T>() / n;
    let mean_y = y.iter().copied().sum::<T>() / n;
    let mut cov = T::zero();
    let mut var_x = T::zero();
    let mut var_y = T::zero();
    for (&xi, &yi) in x.iter().zip(y) {
        let dx = xi - mean_x;
        let dy = yi - mean_y;
        cov += dx * dy;
        var_x += dx * dx;
        var_y += dy * dy;
    }
    if var_x == T::zero() || var_y == T::zero() {
        return Err(PreprocessError::UndefinedCorrelation);
    }
    let r = cov / (var_x * var_y).sqrt();
    // float round-off can push |r| a hair past 1
    Ok(r.max(-T::one()).min(T::one()))
}

/// Two-sided p-value of a correlation coefficient under the null r = 0,
/// via `t = r sqrt((n-2)/(1-r^2))` against a Student-t with `n - 2`
/// degrees of freedom.
pub fn correlation_pvalue<T: Real>(r: T, n: usize) -> Result<T, PreprocessError> {
    if r.abs() > T::one() || !r.is_finite() || n < 3 {
        return Err(PreprocessError::BadVectors);
    }
    if r.abs() == T::one() {
        return Ok(T::zero());
    }
    let df = T::from_count(n - 2);
    let t = r * (df / (T::one() - r * r)).sqrt();
    Ok(student_t_two_sided(t, df))
}

/// Values present in both slices, in sample order (complete-pairs policy
/// for missing data).
pub fn complete_pairs<T: Real>(x: &[Option<T>], y: &[Option<T>]) -> (Vec<T>, Vec<T>) {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (a, b) in x.iter().zip(y) {
        if let (Some(a), Some(b)) = (a, b) {
            xs.push(*a);
            ys.push(*b);
        }
    }
    (xs, ys)
}
