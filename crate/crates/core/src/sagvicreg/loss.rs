//! The three VICReg terms and their gradients with respect to the
//! embedding matrix.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numkit::Mat;

/// Values of the three terms and their weighted sum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossBreakdown {
    pub invariance: f64,
    pub variance: f64,
    pub covariance: f64,
    pub total: f64,
}

impl LossBreakdown {
    pub fn combine(lambda: f64, mu: f64, nu: f64, invariance: f64, variance: f64, covariance: f64) -> Self {
        LossBreakdown {
            invariance,
            variance,
            covariance,
            total: lambda * invariance + mu * variance + nu * covariance,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.invariance.is_finite()
            && self.variance.is_finite()
            && self.covariance.is_finite()
            && self.total.is_finite()
    }
}

fn need_two_rows(y: &Mat, what: &str) -> Result<()> {
    if y.rows() < 2 {
        return Err(Error::InvalidInput(format!(
            "{what} needs at least 2 rows, got {}",
            y.rows()
        )));
    }
    Ok(())
}

fn same_shape(a: &Mat, b: &Mat) -> Result<()> {
    if a.shape() != b.shape() {
        return Err(Error::Shape(format!("{:?} vs {:?}", a.shape(), b.shape())));
    }
    Ok(())
}

/// Unbiased column variances.
fn column_variances(y: &Mat) -> Vec<f64> {
    let c = y.centered();
    let n1 = (y.rows() - 1) as f64;
    (0..y.cols())
        .map(|j| c.row_iter().map(|r| r[j] * r[j]).sum::<f64>() / n1)
        .collect()
}

/// Mean hinge `max(0, γ - √(Var + ε))` over columns.
pub fn variance_term(y: &Mat, gamma: f64, epsilon: f64) -> Result<f64> {
    need_two_rows(y, "variance term")?;
    let k = y.cols() as f64;
    Ok(column_variances(y)
        .iter()
        .map(|v| (gamma - (v + epsilon).sqrt()).max(0.0))
        .sum::<f64>()
        / k)
}

pub(crate) fn variance_grad(y: &Mat, gamma: f64, epsilon: f64) -> Mat {
    let (n, k) = y.shape();
    let c = y.centered();
    let std: Vec<f64> = column_variances(y).iter().map(|v| (v + epsilon).sqrt()).collect();
    let mut g = Mat::zeros(n, k);
    for i in 0..n {
        for j in 0..k {
            if gamma - std[j] > 0.0 {
                g[(i, j)] = -c[(i, j)] / ((n - 1) as f64 * std[j] * k as f64);
            }
        }
    }
    g
}

/// Mean squared row distance between two views.
pub fn invariance_term(y: &Mat, y2: &Mat) -> Result<f64> {
    same_shape(y, y2)?;
    Ok(weighted_sum(y, y2, None))
}

fn weighted_sum(z: &Mat, z2: &Mat, weights: Option<&[f64]>) -> f64 {
    let mut s = 0.0;
    for i in 0..z.rows() {
        let d: f64 = z.row(i).iter().zip(z2.row(i)).map(|(a, b)| (a - b) * (a - b)).sum();
        s += match weights {
            Some(w) => w[i] * d,
            None => d,
        };
    }
    s / z.rows() as f64
}

/// Per-row weighted squared distance, `(1/n) Σ wᵢ ‖zᵢ - z2ᵢ‖²`.
pub fn weighted_invariance(z: &Mat, z2: &Mat, weights: &[f64]) -> Result<f64> {
    same_shape(z, z2)?;
    if weights.len() != z.rows() {
        return Err(Error::Shape(format!("{} weights for {} rows", weights.len(), z.rows())));
    }
    if let Some(w) = weights.iter().find(|w| !(0.0..=1.0).contains(*w)) {
        return Err(Error::InvalidInput(format!("pair weight {w} outside [0, 1]")));
    }
    Ok(weighted_sum(z, z2, Some(weights)))
}

/// Gradient of the weighted invariance with respect to `z`; the gradient
/// with respect to `z2` is its negation.
pub(crate) fn weighted_invariance_grad(z: &Mat, z2: &Mat, weights: &[f64]) -> Mat {
    let n = z.rows() as f64;
    let mut g = z.sub(z2).expect("same shape");
    for (i, w) in weights.iter().enumerate() {
        g.row_mut(i).iter_mut().for_each(|v| *v *= 2.0 * w / n);
    }
    g
}

fn covariance_matrix(y: &Mat) -> (Mat, Mat) {
    let c = y.centered();
    let cov = c.t_matmul(&c).expect("same rows").scale(1.0 / (y.rows() - 1) as f64);
    (c, cov)
}

/// Sum of squared off-diagonal sample covariances, divided by the number of
/// columns.
pub fn covariance_term(y: &Mat) -> Result<f64> {
    need_two_rows(y, "covariance term")?;
    let (_, cov) = covariance_matrix(y);
    let k = y.cols();
    let mut s = 0.0;
    for a in 0..k {
        for b in 0..k {
            if a != b {
                s += cov[(a, b)] * cov[(a, b)];
            }
        }
    }
    Ok(s / k as f64)
}

pub(crate) fn covariance_grad(y: &Mat) -> Mat {
    let (n, k) = y.shape();
    let (c, mut cov) = covariance_matrix(y);
    for a in 0..k {
        cov[(a, a)] = 0.0;
    }
    c.matmul(&cov).expect("square").scale(4.0 / (k as f64 * (n - 1) as f64))
}
