//! Nearest-neighbor search for points that are low-dimensional signals buried
//! in high-dimensional noise.
//!
//! The data model: an adversary places `n` points inside an unknown
//! `k`-dimensional subspace of ℝ^d (`k ≪ d`), one of them planted within
//! distance 1 of a query while every other point stays at distance at least
//! `1 + ε`. Everything is then corrupted, either by i.i.d. Gaussian noise of
//! per-coordinate deviation `σ` or by bounded adversarial displacements. The
//! indexes in this crate recover the planted neighbor by peeling the point set
//! into spectral layers (iterative PCA) or by recursively slicing along top
//! principal directions (PCA tree), so that query time is dominated by
//! low-dimensional scans instead of full `n·d` work.
//!
//! Modules:
//! - [`linalg`]: dense matrices, SVD, subspaces, principal-angle distances.
//! - [`genmodel`]: planted-instance generator and noise channels.
//! - [`kdnns`]: exact low-dimensional scan used inside every layer.
//! - [`iterpca`]: layered spectral indexes (bounded-noise and sampled variants).
//! - [`pcatree`]: PCA tree with de-clumping and budgeted slab descent.
//! - [`verify`]: Monte Carlo and deterministic checks for the bounds the
//!   algorithms rely on.
//! - [`io`]: dataset and index serialization.

pub mod error;
pub mod genmodel;
pub mod io;
pub mod iterpca;
pub mod kdnns;
pub mod linalg;
pub mod pcatree;
pub mod seeds;
pub mod verify;

pub use error::{Error, Result};
pub use genmodel::{Adversary, Geometry, NoiseMode, NoisyInstance, PlantedInstance};
pub use iterpca::{CaptureMode, IterPcaIndex, IterPcaParams, Variant};
pub use kdnns::LowDimIndex;
pub use linalg::{DenseMatrix, Subspace, SvdResult};
pub use pcatree::{PcaTree, PcaTreeParams};
pub use verify::{DiagnosticsConfig, VerifyReport};
