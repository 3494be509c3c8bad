//! Orthonormal subspaces of ℝ^d and distances to and between them.

use super::matrix::{dot, norm, DenseMatrix};
use super::svd::svd;
use crate::error::{Error, Result};

const ORTHO_TOL: f64 = 1e-9;

/// A linear subspace given by an orthonormal basis. Row `i` of `basis` is the
/// `i`-th basis vector; `dim` may be zero (basis with no rows).
#[derive(Debug, Clone, PartialEq)]
pub struct Subspace {
    ambient: usize,
    basis: DenseMatrix,
}

impl Subspace {
    /// Wraps `basis` (rows = basis vectors) after checking pairwise
    /// orthonormality to within `1e-9`.
    pub fn new(ambient: usize, basis: DenseMatrix) -> Result<Self> {
        if basis.rows() > 0 && basis.cols() != ambient {
            return Err(Error::DimMismatch {
                context: "Subspace::new",
                expected: ambient,
                got: basis.cols(),
            });
        }
        if basis.rows() > ambient {
            return Err(Error::InvalidParam(format!(
                "{} basis vectors in ambient dimension {ambient}",
                basis.rows()
            )));
        }
        for i in 0..basis.rows() {
            for j in i..basis.rows() {
                let g = dot(basis.row(i), basis.row(j));
                let want = if i == j { 1.0 } else { 0.0 };
                if (g - want).abs() > ORTHO_TOL {
                    return Err(Error::InvalidParam(format!(
                        "basis not orthonormal: gram({i},{j}) = {g}"
                    )));
                }
            }
        }
        Ok(Self { ambient, basis })
    }

    pub fn empty(ambient: usize) -> Self {
        Self {
            ambient,
            basis: DenseMatrix::zeros(0, ambient),
        }
    }

    pub fn dim(&self) -> usize {
        self.basis.rows()
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient
    }

    pub fn basis(&self) -> &DenseMatrix {
        &self.basis
    }

    pub fn basis_row(&self, i: usize) -> &[f64] {
        self.basis.row(i)
    }

    /// Coordinates ⟨x, b_i⟩ of `x` against the basis.
    pub fn coords(&self, x: &[f64]) -> Vec<f64> {
        (0..self.dim()).map(|i| dot(x, self.basis.row(i))).collect()
    }

    /// Orthogonal projection of `x` onto the subspace, in ambient coordinates.
    pub fn project(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.ambient];
        for i in 0..self.dim() {
            let c = dot(x, self.basis.row(i));
            for (o, b) in out.iter_mut().zip(self.basis.row(i)) {
                *o += c * b;
            }
        }
        out
    }

    /// x − P(x): the component of `x` orthogonal to the subspace.
    pub fn residual(&self, x: &[f64]) -> Vec<f64> {
        let p = self.project(x);
        x.iter().zip(&p).map(|(a, b)| a - b).collect()
    }
}

/// Distance from `x` to the subspace, computed as ‖x − P(x)‖ rather than by
/// Pythagoras so that near-membership does not cancel catastrophically.
pub fn dist_to_subspace(x: &[f64], s: &Subspace) -> Result<f64> {
    if x.len() != s.ambient_dim() {
        return Err(Error::DimMismatch {
            context: "dist_to_subspace",
            expected: s.ambient_dim(),
            got: x.len(),
        });
    }
    Ok(norm(&s.residual(x)))
}

/// Rows of `points` expressed in basis coordinates of `s` (n × dim).
pub fn project_coords(points: &DenseMatrix, s: &Subspace) -> Result<DenseMatrix> {
    if points.cols() != s.ambient_dim() {
        return Err(Error::DimMismatch {
            context: "project_coords",
            expected: s.ambient_dim(),
            got: points.cols(),
        });
    }
    let mut data = Vec::with_capacity(points.rows() * s.dim());
    for r in 0..points.rows() {
        data.extend(s.coords(points.row(r)));
    }
    DenseMatrix::new(points.rows(), s.dim(), data)
}

/// Span of the top `dim` right singular vectors of `m`: among all
/// `dim`-dimensional subspaces it minimizes the sum of squared distances of
/// the rows. `dim` may exceed `rank(m)` (but not `cols`); the basis is then
/// completed deterministically from standard basis vectors.
pub fn top_subspace(m: &DenseMatrix, dim: usize) -> Result<Subspace> {
    if dim > m.cols() {
        return Err(Error::InvalidParam(format!(
            "requested subspace dim {dim} exceeds ambient {}",
            m.cols()
        )));
    }
    if dim == 0 {
        return Ok(Subspace::empty(m.cols()));
    }
    let r = svd(m)?;
    let avail = r.right_vectors.rows().min(dim);
    let mut rows: Vec<Vec<f64>> = (0..avail)
        .map(|i| r.right_vectors.row(i).to_vec())
        .collect();
    if rows.len() < dim {
        complete_basis(&mut rows, m.cols(), dim);
    }
    Subspace::new(m.cols(), DenseMatrix::from_rows(&rows)?)
}

/// Extends `rows` to `dim` orthonormal vectors by Gram–Schmidt over the
/// standard basis, skipping directions mostly captured already.
fn complete_basis(rows: &mut Vec<Vec<f64>>, ambient: usize, dim: usize) {
    for axis in 0..ambient {
        if rows.len() == dim {
            return;
        }
        let mut v = vec![0.0; ambient];
        v[axis] = 1.0;
        for _ in 0..2 {
            for b in rows.iter() {
                let c = dot(&v, b);
                for (x, y) in v.iter_mut().zip(b) {
                    *x -= c * y;
                }
            }
        }
        let n = norm(&v);
        if n > 0.5 {
            for x in v.iter_mut() {
                *x /= n;
            }
            rows.push(v);
        }
    }
}

/// One-sided principal-angle distance
/// `sin θ(B, A) = max over unit x ∈ B of min over y ∈ A of ‖x − y‖`,
/// i.e. the largest singular value of (I − P_A) applied to a basis of B.
/// Zero when B ⊆ A (and when B is empty); 1 when some direction of B is
/// orthogonal to all of A. Not symmetric.
pub fn sin_theta(b: &Subspace, a: &Subspace) -> Result<f64> {
    if b.ambient_dim() != a.ambient_dim() {
        return Err(Error::DimMismatch {
            context: "sin_theta",
            expected: a.ambient_dim(),
            got: b.ambient_dim(),
        });
    }
    if b.dim() == 0 {
        return Ok(0.0);
    }
    let residuals: Vec<Vec<f64>> = (0..b.dim()).map(|i| a.residual(b.basis_row(i))).collect();
    let m = DenseMatrix::from_rows(&residuals)?;
    // All-zero residual matrix (B inside A) still has a valid SVD.
    let s = svd(&m)?.singular_values[0];
    Ok(s.clamp(0.0, 1.0))
}

/// Subtracts the mean row; returns the centered matrix and the mean.
pub fn center(m: &DenseMatrix) -> (DenseMatrix, Vec<f64>) {
    let (rows, cols) = (m.rows(), m.cols());
    let mut mean = vec![0.0; cols];
    for r in m.row_iter().take(rows) {
        for (s, v) in mean.iter_mut().zip(r) {
            *s += v;
        }
    }
    if rows > 0 {
        for s in mean.iter_mut() {
            *s /= rows as f64;
        }
    }
    let mut data = Vec::with_capacity(rows * cols);
    for r in m.row_iter().take(rows) {
        data.extend(r.iter().zip(&mean).map(|(v, mu)| v - mu));
    }
    (
        DenseMatrix::new(rows, cols, data).expect("centering preserves shape"),
        mean,
    )
}

/// Sum over rows of squared distance to `s`; the quantity `top_subspace`
/// minimizes.
pub fn sum_sq_dist(points: &DenseMatrix, s: &Subspace) -> Result<f64> {
    let mut total = 0.0;
    for r in 0..points.rows() {
        let d = dist_to_subspace(points.row(r), s)?;
        total += d * d;
    }
    Ok(total)
}
