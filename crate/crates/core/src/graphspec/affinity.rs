//! Locally scaled Gaussian k-nearest-neighbour affinities.
//!
//! The construction runs in four stages, each exposed in [`KernelStages`]
//! so it can be checked on its own:
//!
//! 1. the `k` nearest columns of every row of a distance matrix;
//! 2. those distances shifted so the nearest one becomes zero;
//! 3. a per-row bandwidth, the chosen percentile of the shifted distances
//!    clamped below by a floor;
//! 4. `exp(-shifted² / bandwidth²)` on the neighbours, zero elsewhere.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numkit::Mat;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelParams {
    pub k_neighbors: usize,
    /// Percentile in (0, 100) of the shifted neighbour distances.
    pub scale_percentile: f64,
    pub scale_floor: f64,
}

impl KernelParams {
    pub fn validate(&self) -> Result<()> {
        if self.k_neighbors == 0 {
            return Err(Error::InvalidInput("k_neighbors must be at least 1".into()));
        }
        if !(self.scale_percentile > 0.0 && self.scale_percentile < 100.0) {
            return Err(Error::InvalidInput(format!(
                "scale percentile {} outside (0, 100)",
                self.scale_percentile
            )));
        }
        if !(self.scale_floor > 0.0 && self.scale_floor.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "scale floor {} must be positive",
                self.scale_floor
            )));
        }
        Ok(())
    }
}

/// Intermediate results of [`local_scaled_kernel`].
#[derive(Debug, Clone)]
pub struct KernelStages {
    /// Column ids of each row's neighbours, nearest first.
    pub neighbors: Vec<Vec<usize>>,
    /// Raw distances to those neighbours.
    pub neighbor_dist: Vec<Vec<f64>>,
    /// Distances after subtracting the row's nearest distance.
    pub shifted: Vec<Vec<f64>>,
    /// Per-row bandwidth.
    pub scales: Vec<f64>,
    /// Masked affinity, same shape as the input distance matrix.
    pub weights: Mat,
}

/// Percentile with linear interpolation between order statistics
/// (position `p/100 * (len-1)` in the sorted sample).
pub fn percentile(sorted: &[f64], p: f64) -> f64 {
    debug_assert!(!sorted.is_empty());
    debug_assert!(sorted.windows(2).all(|w| w[0] <= w[1]));
    let pos = p / 100.0 * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    sorted[lo] + (sorted[hi] - sorted[lo]) * frac
}

/// Builds the locally scaled kernel from a dense distance matrix.
///
/// With `skip_diagonal` a row never selects its own column (square input
/// only). Neighbour ties go to the lower column index.
pub fn local_scaled_kernel(dist: &Mat, params: &KernelParams, skip_diagonal: bool) -> Result<KernelStages> {
    params.validate()?;
    let (n, m) = dist.shape();
    if skip_diagonal && n != m {
        return Err(Error::Shape(format!(
            "self-affinity needs a square distance matrix, got {n}x{m}"
        )));
    }
    let available = if skip_diagonal { m - 1 } else { m };
    let k = params.k_neighbors;
    if k > available {
        return Err(Error::InvalidInput(format!(
            "k_neighbors = {k} exceeds the {available} candidate neighbours"
        )));
    }

    let mut stages = KernelStages {
        neighbors: Vec::with_capacity(n),
        neighbor_dist: Vec::with_capacity(n),
        shifted: Vec::with_capacity(n),
        scales: Vec::with_capacity(n),
        weights: Mat::zeros(n, m),
    };
    for i in 0..n {
        let row = dist.row(i);
        let mut cand: Vec<usize> = (0..m).filter(|&j| !(skip_diagonal && j == i)).collect();
        cand.sort_by(|&a, &b| row[a].total_cmp(&row[b]).then(a.cmp(&b)));
        cand.truncate(k);

        let raw: Vec<f64> = cand.iter().map(|&j| row[j]).collect();
        let nearest = raw[0];
        let shifted: Vec<f64> = raw.iter().map(|d| d - nearest).collect();
        let scale = percentile(&shifted, params.scale_percentile).max(params.scale_floor);
        for (&j, s) in cand.iter().zip(&shifted) {
            stages.weights[(i, j)] = (-(s * s) / (scale * scale)).exp();
        }
        stages.neighbors.push(cand);
        stages.neighbor_dist.push(raw);
        stages.shifted.push(shifted);
        stages.scales.push(scale);
    }
    Ok(stages)
}
