//! Exact nearest-neighbor scan over points that live in a small number of
//! coordinates (the per-layer projections). A linear scan is the right tool
//! at these dimensions: it is branch-free, exact, and trivially deterministic.
//! Ties break toward the smallest id.

use crate::error::{Error, Result};
use crate::linalg::{dist_sq, DenseMatrix};

#[derive(Debug, Clone)]
pub struct LowDimIndex {
    dim: usize,
    ids: Vec<usize>,
    /// len = ids.len() * dim, row-major coordinates.
    coords: Vec<f64>,
}

/// Builds an index over `points` (one row per id). Ids must be unique and
/// match the row count.
pub fn build_lowdim(points: &DenseMatrix, ids: &[usize]) -> Result<LowDimIndex> {
    if ids.len() != points.rows() {
        return Err(Error::DimMismatch {
            context: "build_lowdim ids",
            expected: points.rows(),
            got: ids.len(),
        });
    }
    let mut seen = ids.to_vec();
    seen.sort_unstable();
    if seen.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::InvalidParam("duplicate ids in low-dim index".into()));
    }
    Ok(LowDimIndex {
        dim: points.cols(),
        ids: ids.to_vec(),
        coords: points.data().to_vec(),
    })
}

/// Exact nearest neighbor of `query` among the indexed points, as
/// `(id, distance)`. Errors on an empty index or a dimension mismatch.
pub fn query_lowdim(index: &LowDimIndex, query: &[f64]) -> Result<(usize, f64)> {
    if index.ids.is_empty() {
        return Err(Error::EmptyIndex);
    }
    if query.len() != index.dim {
        return Err(Error::DimMismatch {
            context: "query_lowdim",
            expected: index.dim,
            got: query.len(),
        });
    }
    let mut best_id = usize::MAX;
    let mut best_d2 = f64::INFINITY;
    for (row, &id) in index.ids.iter().enumerate() {
        let p = &index.coords[row * index.dim..(row + 1) * index.dim];
        let d2 = dist_sq(p, query);
        if d2 < best_d2 || (d2 == best_d2 && id < best_id) {
            best_d2 = d2;
            best_id = id;
        }
    }
    Ok((best_id, best_d2.sqrt()))
}

impl LowDimIndex {
    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn ids(&self) -> &[usize] {
        &self.ids
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seeds;
    use rand::Rng;

    /// Second, independently written scan: different loop structure and
    /// comparison order, used only to cross-check `query_lowdim`.
    fn oracle_scan(pts: &[Vec<f64>], ids: &[usize], q: &[f64]) -> (usize, f64) {
        let mut pairs: Vec<(f64, usize)> = Vec::new();
        for (p, &id) in pts.iter().zip(ids) {
            let mut acc = 0.0;
            for j in 0..q.len() {
                acc += (p[j] - q[j]).powi(2);
            }
            pairs.push((acc, id));
        }
        pairs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        (pairs[0].1, pairs[0].0.sqrt())
    }

    #[test]
    fn matches_independent_scan() {
        let mut rng = seeds::rng(31, 0);
        let pts: Vec<Vec<f64>> = (0..100)
            .map(|_| (0..5).map(|_| rng.gen_range(-3.0..3.0)).collect())
            .collect();
        let ids: Vec<usize> = (0..100).map(|i| i * 7 + 3).collect();
        let m = DenseMatrix::from_rows(&pts).unwrap();
        let idx = build_lowdim(&m, &ids).unwrap();
        for _ in 0..20 {
            let q: Vec<f64> = (0..5).map(|_| rng.gen_range(-3.0..3.0)).collect();
            let (id, dist) = query_lowdim(&idx, &q).unwrap();
            let (oid, odist) = oracle_scan(&pts, &ids, &q);
            assert_eq!(id, oid);
            assert!((dist - odist).abs() <= 1e-12);
        }
    }

    #[test]
    fn ties_break_to_smallest_id() {
        // two points equidistant from the query
        let m = DenseMatrix::from_rows(&[vec![1.0, 0.0], vec![-1.0, 0.0]]).unwrap();
        let idx = build_lowdim(&m, &[9, 4]).unwrap();
        let (id, dist) = query_lowdim(&idx, &[0.0, 0.0]).unwrap();
        assert_eq!(id, 4);
        assert!((dist - 1.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_inputs() {
        let m = DenseMatrix::from_rows(&[vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        assert!(build_lowdim(&m, &[1]).is_err());
        assert!(build_lowdim(&m, &[2, 2]).is_err());
        let idx = build_lowdim(&m, &[0, 1]).unwrap();
        assert!(query_lowdim(&idx, &[1.0]).is_err());
        let empty = build_lowdim(&DenseMatrix::zeros(0, 2), &[]).unwrap();
        assert!(matches!(query_lowdim(&empty, &[0.0, 0.0]), Err(Error::EmptyIndex)));
    }

    #[test]
    fn zero_dim_index_returns_smallest_id_at_distance_zero() {
        let m = DenseMatrix::zeros(3, 0);
        let idx = build_lowdim(&m, &[5, 2, 8]).unwrap();
        let (id, dist) = query_lowdim(&idx, &[]).unwrap();
        assert_eq!(id, 2);
        assert_eq!(dist, 0.0);
    }
}
