//! Affinity-weighted, random-walk-paired VICReg at desk scale, plus a
//! label-free structural comparison of embedding sets built on
//! dendrograms.
//!
//! Modules, bottom-up:
//!
//! - [`numkit`]: dense matrices, distances, Jacobi eigensolver, k-means, ranks.
//! - [`graphspec`]: Laplacians, random walks, eigenmaps, spectral clustering.
//! - [`hierclust`]: agglomerative clustering, cophenetic and LCA distances.
//! - [`structmetrics`]: correlations, Rand index, structural similarity,
//!   hierarchical evaluation protocols.
//! - [`sagvicreg`]: the VICReg loss family, batch affinities, pair sampling,
//!   a small hand-differentiated network, training and the unseen-cluster
//!   experiment.

pub mod error;
pub mod graphspec;
pub mod hierclust;
pub mod numkit;
mod partition;
pub mod sagvicreg;
pub mod structmetrics;

pub use error::{Error, Result};
pub use numkit::{CondensedDist, Mat, Metric};
pub use partition::Partition;
