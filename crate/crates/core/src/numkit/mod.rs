//! Dense numerical kernel shared by the rest of the crate.

mod distance;
mod eigen;
mod kmeans;
mod mat;
mod rank;
pub mod rng;

pub use distance::{cross_distances, pairwise_distances, CondensedDist, Metric};
pub(crate) use eigen::fix_sign;
pub use eigen::{symmetric_eig, EigDecomp, JACOBI_MAX_SWEEPS, JACOBI_TOL};
pub use kmeans::{kmeans, KMeansFit, DEFAULT_RESTARTS};
pub use mat::Mat;
pub use rank::rank_transform;
