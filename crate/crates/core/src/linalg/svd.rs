//! Singular value decomposition and the spectral quantities built on it.
//!
//! The factorization itself is Golub–Kahan bidiagonalization (via nalgebra),
//! which keeps tiny singular values accurate in absolute terms; a rank-k
//! matrix reports s_{k+1} at machine-epsilon scale rather than at the squared
//! scale a Gram-matrix route would give. Results are re-sorted here so the
//! ordering contract never depends on backend internals.

use super::matrix::DenseMatrix;
use crate::error::{Error, Result};

/// Singular values in non-increasing order plus the matching right singular
/// vectors. `right_vectors` has `min(rows, cols)` rows; row `i` is the unit
/// vector in ℝ^cols paired with `singular_values[i]`.
#[derive(Debug, Clone)]
pub struct SvdResult {
    pub singular_values: Vec<f64>,
    pub right_vectors: DenseMatrix,
}

/// Full SVD of `m`. Deterministic: identical input bytes give identical
/// output bytes. Signs and the ordering of exactly tied singular values are
/// fixed by the implementation but otherwise arbitrary; downstream code only
/// consumes spans.
pub fn svd(m: &DenseMatrix) -> Result<SvdResult> {
    if m.rows() == 0 || m.cols() == 0 {
        return Err(Error::InvalidParam("svd of empty matrix".into()));
    }
    let na = m.to_na();
    let decomp = nalgebra::SVD::new_unordered(na, false, true);
    let v_t = decomp
        .v_t
        .ok_or_else(|| Error::InvalidParam("svd backend returned no right vectors".into()))?;
    let p = m.rows().min(m.cols());
    debug_assert_eq!(v_t.nrows(), p);
    debug_assert_eq!(v_t.ncols(), m.cols());

    // Stable sort by descending singular value; ties keep backend order.
    let mut order: Vec<usize> = (0..p).collect();
    order.sort_by(|&a, &b| {
        decomp.singular_values[b]
            .partial_cmp(&decomp.singular_values[a])
            .expect("singular values are finite")
    });

    let mut singular_values = Vec::with_capacity(p);
    let mut rows = Vec::with_capacity(p * m.cols());
    for &i in &order {
        singular_values.push(decomp.singular_values[i].max(0.0));
        rows.extend(v_t.row(i).iter().copied());
    }
    Ok(SvdResult {
        singular_values,
        right_vectors: DenseMatrix::new(p, m.cols(), rows)?,
    })
}

/// Largest singular value of `m`.
pub fn spectral_norm(m: &DenseMatrix) -> Result<f64> {
    Ok(svd(m)?.singular_values[0])
}

/// Number of singular values of `m` that are `>= delta` (inclusive).
pub fn threshold_count(m: &DenseMatrix, delta: f64) -> Result<usize> {
    if !delta.is_finite() {
        return Err(Error::NonFinite("threshold_count delta"));
    }
    Ok(svd(m)?
        .singular_values
        .iter()
        .filter(|&&s| s >= delta)
        .count())
}
