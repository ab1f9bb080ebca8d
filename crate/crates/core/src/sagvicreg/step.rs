//! One optimisation step: forward both views, form pairs, evaluate the
//! loss and backpropagate.

use crate::error::{Error, Result};
use crate::numkit::Mat;

use super::config::VicregConfig;
use super::encoder::ToyEncoder;
use super::loss::{
    covariance_grad, covariance_term, variance_grad, variance_term, weighted_invariance, weighted_invariance_grad,
    LossBreakdown,
};
use super::pairing::{batch_affinity, sample_pairs, SampledPairs};

/// Loss of a step, gradient over the flat parameter vector and the pairing
/// that was used.
#[derive(Debug, Clone)]
pub struct StepOutput {
    pub loss: LossBreakdown,
    pub grads: Vec<f64>,
    pub pairs: SampledPairs,
}

fn check_views(v1: &Mat, v2: &Mat, min_rows: usize) -> Result<()> {
    if v1.shape() != v2.shape() {
        return Err(Error::Shape(format!("views {:?} and {:?}", v1.shape(), v2.shape())));
    }
    if v1.rows() < min_rows {
        return Err(Error::InvalidInput(format!(
            "batch of {} rows, need at least {min_rows}",
            v1.rows()
        )));
    }
    Ok(())
}

fn evaluate(z: &Mat, z2: &Mat, cfg: &VicregConfig, pairs: &SampledPairs) -> Result<(LossBreakdown, Mat)> {
    if pairs.len() != z.rows() || pairs.index.iter().any(|&j| j >= z2.rows()) {
        return Err(Error::InvalidInput("pairing does not fit the batch".into()));
    }
    let zp = z2.select_rows(&pairs.index);
    let inv = weighted_invariance(z, &zp, &pairs.weight)?;
    let var = (variance_term(z, cfg.gamma, cfg.epsilon)? + variance_term(&zp, cfg.gamma, cfg.epsilon)?) / 2.0;
    let cov = (covariance_term(z)? + covariance_term(&zp)?) / 2.0;
    Ok((
        LossBreakdown::combine(cfg.lambda_inv, cfg.mu_var, cfg.nu_cov, inv, var, cov),
        zp,
    ))
}

/// Loss for a fixed pairing, without gradients.
pub fn loss_with_pairs(
    v1: &Mat,
    v2: &Mat,
    enc: &ToyEncoder,
    cfg: &VicregConfig,
    pairs: &SampledPairs,
) -> Result<LossBreakdown> {
    check_views(v1, v2, 2)?;
    let z = enc.embed(v1)?;
    let z2 = enc.embed(v2)?;
    Ok(evaluate(&z, &z2, cfg, pairs)?.0)
}

/// Loss and gradient for a fixed pairing; indices and weights are
/// constants of the step.
pub fn step_with_pairs(
    v1: &Mat,
    v2: &Mat,
    enc: &ToyEncoder,
    cfg: &VicregConfig,
    pairs: SampledPairs,
) -> Result<StepOutput> {
    check_views(v1, v2, 2)?;
    let c1 = enc.forward(v1)?;
    let c2 = enc.forward(v2)?;
    backprop(enc, cfg, &c1, &c2, pairs)
}

fn backprop(
    enc: &ToyEncoder,
    cfg: &VicregConfig,
    c1: &super::encoder::ForwardCache,
    c2: &super::encoder::ForwardCache,
    pairs: SampledPairs,
) -> Result<StepOutput> {
    let (z, z2) = (c1.output(), c2.output());
    let (loss, zp) = evaluate(z, z2, cfg, &pairs)?;

    let g_inv = weighted_invariance_grad(z, &zp, &pairs.weight);
    let half_mu = cfg.mu_var / 2.0;
    let half_nu = cfg.nu_cov / 2.0;
    let gz = g_inv
        .scale(cfg.lambda_inv)
        .add(&variance_grad(z, cfg.gamma, cfg.epsilon).scale(half_mu))?
        .add(&covariance_grad(z).scale(half_nu))?;
    let gzp = g_inv
        .scale(-cfg.lambda_inv)
        .add(&variance_grad(&zp, cfg.gamma, cfg.epsilon).scale(half_mu))?
        .add(&covariance_grad(&zp).scale(half_nu))?;
    // Rows of Z'' are copies of rows of Z'; their gradients accumulate.
    let mut gz2 = Mat::zeros(z2.rows(), z2.cols());
    for (i, &j) in pairs.index.iter().enumerate() {
        for (t, s) in gz2.row_mut(j).iter_mut().zip(gzp.row(i)) {
            *t += s;
        }
    }
    let mut grads = enc.backward(c1, &gz);
    for (g, h) in grads.iter_mut().zip(enc.backward(c2, &gz2)) {
        *g += h;
    }
    Ok(StepOutput { loss, grads, pairs })
}

/// Affinity-weighted step: the partner of each `Z` row is drawn by a random
/// walk over the kNN affinity between `Z` and `Z'`.
pub fn sag_step(v1: &Mat, v2: &Mat, enc: &ToyEncoder, cfg: &VicregConfig, seed: u64) -> Result<StepOutput> {
    check_views(v1, v2, cfg.k_neighbors.max(2))?;
    let c1 = enc.forward(v1)?;
    let c2 = enc.forward(v2)?;
    let w = batch_affinity(c1.output(), c2.output(), cfg)?;
    let pairs = sample_pairs(&w, seed);
    backprop(enc, cfg, &c1, &c2, pairs)
}

/// Plain step: row `i` of `Z` is paired with row `i` of `Z'`.
pub fn vicreg_step(v1: &Mat, v2: &Mat, enc: &ToyEncoder, cfg: &VicregConfig) -> Result<StepOutput> {
    step_with_pairs(v1, v2, enc, cfg, SampledPairs::identity(v1.rows()))
}
