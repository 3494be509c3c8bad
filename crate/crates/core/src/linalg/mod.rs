//! Dense linear algebra: row-major matrices, singular value decomposition,
//! orthonormal subspaces, and the principal-angle distance between them.

mod matrix;
mod subspace;
mod svd;

pub use matrix::DenseMatrix;
pub use subspace::{
    center, dist_to_subspace, project_coords, sin_theta, sum_sq_dist, top_subspace, Subspace,
};
pub use svd::{spectral_norm, svd, threshold_count, SvdResult};

pub(crate) use matrix::{dist_sq, dot, norm, norm_sq};
