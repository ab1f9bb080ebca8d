use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numkit::rng::{derive_seed, seeded};
use crate::numkit::Mat;

use super::config::VicregConfig;
use super::encoder::ToyEncoder;
use super::loss::LossBreakdown;
use super::step::{sag_step, vicreg_step};
use super::synth::Augmenter;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    /// Row `i` of one view paired with row `i` of the other.
    Vicreg,
    /// Partners drawn by a random walk over the batch affinity.
    Sag,
}

impl Variant {
    pub const ALL: [Variant; 2] = [Variant::Vicreg, Variant::Sag];
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Variant::Vicreg => "vicreg",
            Variant::Sag => "sag",
        })
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "vicreg" => Ok(Variant::Vicreg),
            "sag" => Ok(Variant::Sag),
            _ => Err(Error::InvalidInput(format!("unknown variant '{s}' (vicreg|sag)"))),
        }
    }
}

/// Optimiser loop settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub lr: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 500,
            batch_size: 96,
            lr: 0.01,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.batch_size < 2 {
            return Err(Error::InvalidInput(format!("batch size {} below 2", self.batch_size)));
        }
        if !(self.lr > 0.0 && self.lr.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "learning rate {} must be positive",
                self.lr
            )));
        }
        Ok(())
    }
}

const SHUFFLE_STREAM: u64 = 0;
const VIEW_STREAM: u64 = 1;
const PAIR_STREAM: u64 = 2;

/// Plain gradient descent over shuffled mini-batches. Returns the trained
/// network and the mean loss of every epoch. A trailing batch too small for
/// the variant is skipped.
pub fn train(
    variant: Variant,
    data: &Mat,
    augmenter: &Augmenter,
    mut enc: ToyEncoder,
    cfg: &VicregConfig,
    opts: &TrainConfig,
) -> Result<(ToyEncoder, Vec<LossBreakdown>)> {
    cfg.validate()?;
    opts.validate()?;
    let n = data.rows();
    let min_batch = match variant {
        Variant::Vicreg => 2,
        Variant::Sag => cfg.k_neighbors.max(2),
    };
    let batch = opts.batch_size.min(n);
    if batch < min_batch {
        return Err(Error::InvalidInput(format!(
            "{n} training rows cannot form a batch of {min_batch}"
        )));
    }

    let mut history = Vec::with_capacity(opts.epochs);
    let mut params = enc.params();
    let mut step: u64 = 0;
    for epoch in 1..=opts.epochs {
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(&mut seeded(derive_seed(
            derive_seed(opts.seed, SHUFFLE_STREAM),
            epoch as u64,
        )));
        let mut sums = [0.0; 3];
        let mut batches = 0usize;
        for chunk in order.chunks(batch).filter(|c| c.len() >= min_batch) {
            let xb = data.select_rows(chunk);
            let (v1, v2) = augmenter.views(&xb, derive_seed(derive_seed(opts.seed, VIEW_STREAM), step));
            let out = match variant {
                Variant::Vicreg => vicreg_step(&v1, &v2, &enc, cfg),
                Variant::Sag => sag_step(
                    &v1,
                    &v2,
                    &enc,
                    cfg,
                    derive_seed(derive_seed(opts.seed, PAIR_STREAM), step),
                ),
            };
            let out = match out {
                Ok(o) if o.loss.is_finite() && o.grads.iter().all(|g| g.is_finite()) => o,
                Ok(_) => return Err(Error::Divergence { epoch }),
                Err(_) if params.iter().any(|p| !p.is_finite()) => return Err(Error::Divergence { epoch }),
                Err(e) => return Err(e),
            };
            for (p, g) in params.iter_mut().zip(&out.grads) {
                *p -= opts.lr * g;
            }
            if params.iter().any(|p| !p.is_finite()) {
                return Err(Error::Divergence { epoch });
            }
            enc.set_params(&params);
            sums[0] += out.loss.invariance;
            sums[1] += out.loss.variance;
            sums[2] += out.loss.covariance;
            batches += 1;
            step += 1;
        }
        let b = batches as f64;
        history.push(LossBreakdown::combine(
            cfg.lambda_inv,
            cfg.mu_var,
            cfg.nu_cov,
            sums[0] / b,
            sums[1] / b,
            sums[2] / b,
        ));
    }
    Ok((enc, history))
}
