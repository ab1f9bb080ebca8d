use serde::{Deserialize, Serialize};

use super::affinity::{local_scaled_kernel, KernelParams};
use super::{spectral_embed, SymAffinity};
use crate::error::{Error, Result};
use crate::numkit::{cross_distances, kmeans, Mat, Metric, DEFAULT_RESTARTS};
use crate::partition::Partition;

/// Graph and clustering settings for [`spectral_clustering`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GraphConfig {
    /// Neighbours per point; clamped to `n - 1` for small inputs.
    pub k_neighbors: usize,
    pub metric: Metric,
    pub scale_percentile: f64,
    pub scale_floor: f64,
    pub kmeans_restarts: usize,
}

impl Default for GraphConfig {
    fn default() -> Self {
        GraphConfig {
            k_neighbors: 7,
            metric: Metric::Cosine,
            scale_percentile: 20.0,
            scale_floor: 1e-7,
            kmeans_restarts: DEFAULT_RESTARTS,
        }
    }
}

/// Locally scaled k-NN affinity over the rows of `x`, symmetrised by
/// taking the larger of `w_ij` and `w_ji`.
pub fn knn_affinity(x: &Mat, cfg: &GraphConfig) -> Result<SymAffinity> {
    let n = x.rows();
    if n < 2 {
        return Err(Error::InvalidInput("affinity graph needs at least 2 points".into()));
    }
    let params = KernelParams {
        k_neighbors: cfg.k_neighbors.min(n - 1),
        scale_percentile: cfg.scale_percentile,
        scale_floor: cfg.scale_floor,
    };
    let dist = cross_distances(x, x, cfg.metric)?;
    let w = local_scaled_kernel(&dist, &params, true)?.weights;
    SymAffinity::new(Mat::from_fn(n, n, |i, j| w[(i, j)].max(w[(j, i)])))
}

/// Spectral clustering: Laplacian eigenmap of the k-NN affinity (the
/// `k - 1` leading non-trivial eigenvectors) followed by k-means.
pub fn spectral_clustering(x: &Mat, k: usize, cfg: &GraphConfig, seed: u64) -> Result<Partition> {
    let n = x.rows();
    if k == 0 || k > n {
        return Err(Error::InvalidInput(format!(
            "k = {k} clusters requested for {n} points"
        )));
    }
    if k == 1 {
        return Ok(Partition::constant(n));
    }
    let w = knn_affinity(x, cfg)?;
    let emb = spectral_embed(&w, k - 1, false)?;
    Ok(kmeans(&emb, k, cfg.kmeans_restarts, seed)?.partition)
}
