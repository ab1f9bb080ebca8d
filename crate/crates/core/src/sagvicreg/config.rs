use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graphspec::KernelParams;

/// Loss weights, variance hinge settings and batch-kernel parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct VicregConfig {
    pub lambda_inv: f64,
    pub mu_var: f64,
    pub nu_cov: f64,
    /// Target standard deviation per dimension.
    pub gamma: f64,
    pub epsilon: f64,
    pub k_neighbors: usize,
    pub scale_percentile: f64,
    pub scale_floor: f64,
}

impl Default for VicregConfig {
    fn default() -> Self {
        VicregConfig {
            lambda_inv: 25.0,
            mu_var: 25.0,
            nu_cov: 1.0,
            gamma: 1.0,
            epsilon: 1e-4,
            k_neighbors: 5,
            scale_percentile: 20.0,
            scale_floor: 1e-7,
        }
    }
}

impl VicregConfig {
    pub fn validate(&self) -> Result<()> {
        let reals = [
            ("lambda_inv", self.lambda_inv),
            ("mu_var", self.mu_var),
            ("nu_cov", self.nu_cov),
            ("gamma", self.gamma),
            ("epsilon", self.epsilon),
        ];
        for (name, v) in reals {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidInput(format!("{name} = {v} must be positive")));
            }
        }
        self.kernel_params().validate()
    }

    pub fn kernel_params(&self) -> KernelParams {
        KernelParams {
            k_neighbors: self.k_neighbors,
            scale_percentile: self.scale_percentile,
            scale_floor: self.scale_floor,
        }
    }
}
