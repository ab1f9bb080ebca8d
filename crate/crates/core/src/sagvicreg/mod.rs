//! Affinity-weighted VICReg: loss terms, batch affinities, random-walk
//! pairing, a small hand-differentiated network, training and the
//! unseen-cluster experiment.

mod config;
mod encoder;
mod experiment;
mod loss;
mod pairing;
mod step;
mod synth;
mod train;

pub use config::VicregConfig;
pub use encoder::{Dense, ForwardCache, ToyEncoder};
pub use experiment::{
    dispersion_ratios, unseen_cluster_experiment, ClusterDispersion, DistortionReport, ExperimentConfig,
    ExperimentOutput, Scatter, VariantDistortion,
};
pub use loss::{covariance_term, invariance_term, variance_term, weighted_invariance, LossBreakdown};
pub use pairing::{batch_affinity, sample_pairs, CrossAffinity, SampledPairs};
pub use step::{loss_with_pairs, sag_step, step_with_pairs, vicreg_step, StepOutput};
pub use synth::{synth_generate, Augmenter, SynthConfig, SynthData};
pub use train::{train, TrainConfig, Variant};
