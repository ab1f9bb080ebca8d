//! Gaussian-cluster toy data and a noise-based two-view augmenter.

use rand_distr::{Distribution, Normal, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numkit::rng::{derive_seed, seeded};
use crate::numkit::Mat;
use crate::partition::Partition;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthConfig {
    pub n_clusters: usize,
    pub points_per_cluster: usize,
    pub ambient_dim: usize,
    /// Standard deviation of the cluster centres around the origin.
    pub center_spread: f64,
    pub cluster_std: f64,
    pub augment_std: f64,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            n_clusters: 3,
            points_per_cluster: 32,
            ambient_dim: 16,
            center_spread: 1.0,
            cluster_std: 1.0,
            augment_std: 0.05,
            seed: 0,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("n_clusters", self.n_clusters),
            ("points_per_cluster", self.points_per_cluster),
            ("ambient_dim", self.ambient_dim),
        ] {
            if v == 0 {
                return Err(Error::InvalidInput(format!("{name} must be positive")));
            }
        }
        for (name, v) in [
            ("center_spread", self.center_spread),
            ("cluster_std", self.cluster_std),
            ("augment_std", self.augment_std),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::InvalidInput(format!("{name} = {v} must be non-negative")));
            }
        }
        Ok(())
    }
}

/// Adds independent Gaussian noise to produce two views of a batch. Each
/// call is keyed by a step counter so views are reproducible.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Augmenter {
    pub std: f64,
    pub seed: u64,
}

impl Augmenter {
    pub fn views(&self, x: &Mat, step: u64) -> (Mat, Mat) {
        let mut rng = seeded(derive_seed(self.seed, step));
        let mut view = || {
            if self.std == 0.0 {
                return x.clone();
            }
            let mut v = x.clone();
            for i in 0..v.rows() {
                for e in v.row_mut(i) {
                    let n: f64 = StandardNormal.sample(&mut rng);
                    *e += self.std * n;
                }
            }
            v
        };
        let a = view();
        let b = view();
        (a, b)
    }
}

#[derive(Debug, Clone)]
pub struct SynthData {
    pub points: Mat,
    pub labels: Partition,
    pub centers: Mat,
    pub augmenter: Augmenter,
    cluster_std: f64,
}

const CENTER_STREAM: u64 = 0;
const POINT_STREAM: u64 = 1;
const AUGMENT_STREAM: u64 = 2;

fn scatter_points(centers: &Mat, per_cluster: usize, std: f64, seed: u64) -> (Mat, Partition) {
    let mut rng = seeded(seed);
    let noise = Normal::new(0.0, std).expect("non-negative std");
    let d = centers.cols();
    let mut data = Vec::with_capacity(centers.rows() * per_cluster * d);
    let mut labels = Vec::with_capacity(centers.rows() * per_cluster);
    for c in 0..centers.rows() {
        for _ in 0..per_cluster {
            for &m in centers.row(c) {
                data.push(if std == 0.0 { m } else { m + noise.sample(&mut rng) });
            }
            labels.push(c);
        }
    }
    (
        Mat::from_vec(labels.len(), d, data).expect("finite samples"),
        Partition::new(labels),
    )
}

impl SynthData {
    /// New draw of `per_cluster` points around the same centres.
    pub fn fresh_sample(&self, per_cluster: usize, seed: u64) -> (Mat, Partition) {
        scatter_points(&self.centers, per_cluster, self.cluster_std, seed)
    }

    /// Points and labels restricted to the given clusters, in original
    /// order.
    pub fn subset(points: &Mat, labels: &Partition, clusters: &[usize]) -> (Mat, Vec<usize>) {
        let rows: Vec<usize> = (0..labels.len())
            .filter(|&i| clusters.contains(&labels.labels()[i]))
            .collect();
        let sub = rows.iter().map(|&i| labels.labels()[i]).collect();
        (points.select_rows(&rows), sub)
    }
}

/// Clusters laid out cluster by cluster: rows `c*p .. (c+1)*p` belong to
/// cluster `c`.
pub fn synth_generate(cfg: &SynthConfig) -> Result<SynthData> {
    cfg.validate()?;
    let mut rng = seeded(derive_seed(cfg.seed, CENTER_STREAM));
    let spread = Normal::new(0.0, cfg.center_spread).expect("non-negative spread");
    let centers = Mat::from_fn(cfg.n_clusters, cfg.ambient_dim, |_, _| spread.sample(&mut rng));
    let (points, labels) = scatter_points(
        &centers,
        cfg.points_per_cluster,
        cfg.cluster_std,
        derive_seed(cfg.seed, POINT_STREAM),
    );
    Ok(SynthData {
        points,
        labels,
        centers,
        augmenter: Augmenter {
            std: cfg.augment_std,
            seed: derive_seed(cfg.seed, AUGMENT_STREAM),
        },
        cluster_std: cfg.cluster_std,
    })
}
