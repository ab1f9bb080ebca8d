//! Training on a subset of clusters and probing how the learned
//! representation treats clusters it never saw.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numkit::rng::derive_seed;
use crate::numkit::{symmetric_eig, Mat};
use crate::structmetrics::{structural_similarity, SimilarityConfig, SimilarityReport};

use super::config::VicregConfig;
use super::encoder::ToyEncoder;
use super::synth::{synth_generate, SynthConfig, SynthData};
use super::train::{train, TrainConfig, Variant};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    pub synth: SynthConfig,
    /// Clusters whose points are used for training the subset model.
    pub train_clusters: Vec<usize>,
    pub vicreg: VicregConfig,
    pub train: TrainConfig,
    /// Fresh points drawn per cluster for evaluation.
    pub test_points_per_cluster: usize,
    pub similarity: SimilarityConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        // Four well-separated clusters, three of them seen. Augmentation
        // noise matches the cluster spread so invariance shapes the seen
        // clusters.
        ExperimentConfig {
            synth: SynthConfig {
                n_clusters: 4,
                center_spread: 2.0,
                cluster_std: 0.5,
                augment_std: 0.5,
                ..SynthConfig::default()
            },
            train_clusters: vec![0, 1, 2],
            vicreg: VicregConfig::default(),
            train: TrainConfig {
                epochs: 1000,
                lr: 0.005,
                ..TrainConfig::default()
            },
            test_points_per_cluster: 32,
            similarity: SimilarityConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterDispersion {
    pub cluster: usize,
    pub seen: bool,
    /// Mean within-cluster distance over mean distance between cluster
    /// centroids.
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariantDistortion {
    pub variant: Variant,
    pub per_cluster: Vec<ClusterDispersion>,
    pub seen_ratio: f64,
    /// Absent when every cluster was used for training.
    pub unseen_ratio: Option<f64>,
    /// Held-out cluster points embedded by the subset model versus the
    /// model trained on all clusters. Absent when nothing was held out.
    pub unseen_similarity: Option<SimilarityReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistortionReport {
    pub seed: u64,
    pub train_clusters: Vec<usize>,
    pub unseen_clusters: Vec<usize>,
    pub variants: Vec<VariantDistortion>,
}

impl DistortionReport {
    pub fn variant(&self, v: Variant) -> &VariantDistortion {
        self.variants
            .iter()
            .find(|d| d.variant == v)
            .expect("both variants are reported")
    }
}

/// 2-D projection of one variant's representations, for plotting.
#[derive(Debug, Clone, PartialEq)]
pub struct Scatter {
    pub variant: Variant,
    pub train: Mat,
    pub train_labels: Vec<usize>,
    pub test: Mat,
    pub test_labels: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct ExperimentOutput {
    pub report: DistortionReport,
    pub scatters: Vec<Scatter>,
}

fn euclid(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Per-cluster dispersion ratios of `y` (rows labelled by `labels`).
pub fn dispersion_ratios(y: &Mat, labels: &[usize], n_clusters: usize) -> Result<Vec<f64>> {
    if labels.len() != y.rows() {
        return Err(Error::Shape(format!("{} labels for {} rows", labels.len(), y.rows())));
    }
    let members: Vec<Vec<usize>> = (0..n_clusters)
        .map(|c| (0..labels.len()).filter(|&i| labels[i] == c).collect())
        .collect();
    if n_clusters < 2 || members.iter().any(|m| m.len() < 2) {
        return Err(Error::InvalidInput(
            "need at least 2 clusters of at least 2 points".into(),
        ));
    }
    let centroids: Vec<Vec<f64>> = members.iter().map(|m| y.select_rows(m).column_means()).collect();
    let mut between = 0.0;
    let mut pairs = 0usize;
    for a in 0..n_clusters {
        for b in (a + 1)..n_clusters {
            between += euclid(&centroids[a], &centroids[b]);
            pairs += 1;
        }
    }
    let between = between / pairs as f64;
    if between == 0.0 {
        return Err(Error::Degenerate("all cluster centroids coincide".into()));
    }
    Ok(members
        .iter()
        .map(|m| {
            let mut s = 0.0;
            let mut k = 0usize;
            for (p, &i) in m.iter().enumerate() {
                for &j in &m[p + 1..] {
                    s += euclid(y.row(i), y.row(j));
                    k += 1;
                }
            }
            s / k as f64 / between
        })
        .collect())
}

/// Projects `x` and `y` onto the two leading principal axes of `x`.
fn pca_2d(fit: &Mat, other: &Mat) -> Result<(Mat, Mat)> {
    let means = fit.column_means();
    let c = fit.centered();
    let cov = c.t_matmul(&c)?.scale(1.0 / (fit.rows().max(2) - 1) as f64);
    let eig = symmetric_eig(&cov)?;
    let d = fit.cols();
    let axes: Vec<Vec<f64>> = (0..2)
        .map(|t| if t < d { eig.vector(d - 1 - t) } else { vec![0.0; d] })
        .collect();
    let project = |m: &Mat| {
        Mat::from_fn(m.rows(), 2, |i, t| {
            m.row(i)
                .iter()
                .zip(&means)
                .zip(&axes[t])
                .map(|((v, mu), a)| (v - mu) * a)
                .sum()
        })
    };
    Ok((project(fit), project(other)))
}

const INIT_STREAM: u64 = 10;
const TRAIN_STREAM: u64 = 11;
const TEST_STREAM: u64 = 12;

fn fit(variant: Variant, data: &SynthData, x: &Mat, cfg: &ExperimentConfig, seed: u64) -> Result<ToyEncoder> {
    let enc = ToyEncoder::with_default_shape(cfg.synth.ambient_dim, derive_seed(seed, INIT_STREAM))?;
    let opts = TrainConfig {
        seed: derive_seed(seed, TRAIN_STREAM),
        ..cfg.train
    };
    Ok(train(variant, x, &data.augmenter, enc, &cfg.vicreg, &opts)?.0)
}

/// Trains both variants on `train_clusters`, embeds fresh points of every
/// cluster and measures how dispersed each cluster is. Held-out clusters are
/// also compared structurally against a model of the same variant trained
/// on all clusters. `seed` replaces the data seed of `cfg`.
pub fn unseen_cluster_experiment(cfg: &ExperimentConfig, seed: u64) -> Result<ExperimentOutput> {
    let k = cfg.synth.n_clusters;
    let mut train_clusters = cfg.train_clusters.clone();
    train_clusters.sort_unstable();
    train_clusters.dedup();
    if train_clusters.is_empty() {
        return Err(Error::InvalidInput("no training clusters".into()));
    }
    if let Some(c) = train_clusters.iter().find(|&&c| c >= k) {
        return Err(Error::InvalidInput(format!("training cluster {c} out of 0..{k}")));
    }
    let unseen: Vec<usize> = (0..k).filter(|c| !train_clusters.contains(c)).collect();

    let data = synth_generate(&SynthConfig { seed, ..cfg.synth })?;
    let (x_train, l_train) = SynthData::subset(&data.points, &data.labels, &train_clusters);
    let (x_test, l_test) = data.fresh_sample(cfg.test_points_per_cluster, derive_seed(seed, TEST_STREAM));
    let l_test = l_test.labels().to_vec();
    let unseen_rows: Vec<usize> = (0..l_test.len()).filter(|&i| unseen.contains(&l_test[i])).collect();

    let mut variants = Vec::new();
    let mut scatters = Vec::new();
    for variant in Variant::ALL {
        let model = fit(variant, &data, &x_train, cfg, seed)?;
        let y_test = model.represent(&x_test)?;
        let ratios = dispersion_ratios(&y_test, &l_test, k)?;
        let per_cluster: Vec<ClusterDispersion> = ratios
            .iter()
            .enumerate()
            .map(|(c, &ratio)| ClusterDispersion {
                cluster: c,
                seen: train_clusters.contains(&c),
                ratio,
            })
            .collect();
        let mean = |seen: bool| {
            let v: Vec<f64> = per_cluster.iter().filter(|d| d.seen == seen).map(|d| d.ratio).collect();
            (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
        };
        let unseen_similarity = if unseen.is_empty() {
            None
        } else {
            let reference = fit(variant, &data, &data.points, cfg, seed)?;
            let ours = y_test.select_rows(&unseen_rows);
            let theirs = reference.represent(&x_test.select_rows(&unseen_rows))?;
            Some(structural_similarity(&ours, &theirs, &cfg.similarity)?)
        };
        variants.push(VariantDistortion {
            variant,
            seen_ratio: mean(true).expect("at least one training cluster"),
            unseen_ratio: mean(false),
            per_cluster,
            unseen_similarity,
        });

        let (train_2d, test_2d) = pca_2d(&model.represent(&x_train)?, &y_test)?;
        scatters.push(Scatter {
            variant,
            train: train_2d,
            train_labels: l_train.clone(),
            test: test_2d,
            test_labels: l_test.clone(),
        });
    }
    Ok(ExperimentOutput {
        report: DistortionReport {
            seed,
            train_clusters,
            unseen_clusters: unseen,
            variants,
        },
        scatters,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick() -> ExperimentConfig {
        ExperimentConfig {
            train: TrainConfig {
                epochs: 5,
                ..Default::default()
            },
            test_points_per_cluster: 8,
            ..Default::default()
        }
    }

    #[test]
    fn dispersion_hand_example() {
        // Two clusters of two points, 1 apart inside, centroids 10 apart.
        let y = Mat::from_rows(&[[0.0, 0.0], [1.0, 0.0], [10.0, 0.0], [11.0, 0.0]]).unwrap();
        assert_eq!(dispersion_ratios(&y, &[0, 0, 1, 1], 2).unwrap(), vec![0.1, 0.1]);
        assert!(dispersion_ratios(&y, &[0, 0, 0, 1], 2).is_err());
    }

    #[test]
    fn report_shape_and_determinism() {
        let cfg = quick();
        let a = unseen_cluster_experiment(&cfg, 3).unwrap();
        let b = unseen_cluster_experiment(&cfg, 3).unwrap();
        assert_eq!(a.report, b.report);
        assert_eq!(a.scatters, b.scatters);
        assert_eq!(a.report.unseen_clusters, vec![3]);
        for v in &a.report.variants {
            assert!(v.unseen_ratio.is_some());
            assert_eq!(v.unseen_similarity.as_ref().unwrap().n, 8);
            assert_eq!(v.per_cluster.len(), 4);
        }
        assert_eq!(a.scatters.len(), 2);
        assert_eq!(a.scatters[0].train.shape(), (96, 2));
        assert_eq!(a.scatters[0].test.shape(), (32, 2));
    }

    #[test]
    fn all_clusters_seen_flags_unseen_fields() {
        let cfg = ExperimentConfig {
            train_clusters: vec![0, 1, 2, 3],
            ..quick()
        };
        let out = unseen_cluster_experiment(&cfg, 0).unwrap();
        assert!(out.report.unseen_clusters.is_empty());
        for v in &out.report.variants {
            assert_eq!(v.unseen_ratio, None);
            assert_eq!(v.unseen_similarity, None);
        }
        assert!(unseen_cluster_experiment(
            &ExperimentConfig {
                train_clusters: vec![],
                ..quick()
            },
            0
        )
        .is_err());
        assert!(unseen_cluster_experiment(
            &ExperimentConfig {
                train_clusters: vec![5],
                ..quick()
            },
            0
        )
        .is_err());
    }
}
