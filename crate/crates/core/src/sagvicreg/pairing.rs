//! Affinity between the two embedded views and random-walk pair formation.

use crate::error::{Error, Result};
use crate::graphspec::{local_scaled_kernel, random_walk_matrix, sample_rows, KernelStages};
use crate::numkit::Mat;

use super::config::VicregConfig;

/// Locally scaled kNN affinity from rows of `Z` (rows) to rows of `Z'`
/// (columns). Every row has at most `k` nonzero entries in (0, 1] and its
/// nearest column has weight exactly 1.
#[derive(Debug, Clone)]
pub struct CrossAffinity {
    stages: KernelStages,
}

impl CrossAffinity {
    pub fn weights(&self) -> &Mat {
        &self.stages.weights
    }

    /// Intermediate kernel stages (neighbour lists, shifted distances,
    /// bandwidths).
    pub fn stages(&self) -> &KernelStages {
        &self.stages
    }

    pub fn n(&self) -> usize {
        self.stages.weights.rows()
    }
}

/// Cosine distances between the rows of two views. A zero row (a dead
/// network output) counts as orthogonal to everything, distance 1.
fn view_distances(z: &Mat, z2: &Mat) -> Mat {
    let unit = |m: &Mat| -> Vec<Option<Vec<f64>>> {
        m.row_iter()
            .map(|r| {
                let norm = r.iter().map(|v| v * v).sum::<f64>().sqrt();
                (norm > 0.0).then(|| r.iter().map(|v| v / norm).collect())
            })
            .collect()
    };
    let (a, b) = (unit(z), unit(z2));
    let mut out = Mat::zeros(z.rows(), z2.rows());
    for (i, u) in a.iter().enumerate() {
        for (j, v) in b.iter().enumerate() {
            out[(i, j)] = match (u, v) {
                (Some(u), Some(v)) => {
                    let sq: f64 = u.iter().zip(v).map(|(x, y)| (x - y) * (x - y)).sum();
                    (0.5 * sq).min(2.0)
                }
                _ => 1.0,
            };
        }
    }
    out
}

/// Cosine-distance kernel between `z` and `z2`. A row may pick its own
/// counterpart in `z2`.
pub fn batch_affinity(z: &Mat, z2: &Mat, cfg: &VicregConfig) -> Result<CrossAffinity> {
    if z.shape() != z2.shape() {
        return Err(Error::Shape(format!("views {:?} and {:?}", z.shape(), z2.shape())));
    }
    if cfg.k_neighbors > z.rows() {
        return Err(Error::InvalidInput(format!(
            "k_neighbors = {} exceeds batch size {}",
            cfg.k_neighbors,
            z.rows()
        )));
    }
    let dist = view_distances(z, z2);
    Ok(CrossAffinity {
        stages: local_scaled_kernel(&dist, &cfg.kernel_params(), false)?,
    })
}

/// One partner per row and the affinity weight of that pair.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledPairs {
    pub index: Vec<usize>,
    pub weight: Vec<f64>,
}

impl SampledPairs {
    /// Row `i` paired with row `i`, weight 1.
    pub fn identity(n: usize) -> SampledPairs {
        SampledPairs {
            index: (0..n).collect(),
            weight: vec![1.0; n],
        }
    }

    pub fn len(&self) -> usize {
        self.index.len()
    }

    pub fn is_empty(&self) -> bool {
        self.index.is_empty()
    }
}

/// Samples a partner per row from the row-normalised affinity.
pub fn sample_pairs(w: &CrossAffinity, seed: u64) -> SampledPairs {
    let p = random_walk_matrix(w.weights()).expect("kernel weights are non-negative");
    let index = sample_rows(&p, seed);
    let weight = index.iter().enumerate().map(|(i, &j)| w.weights()[(i, j)]).collect();
    SampledPairs { index, weight }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn affinity_from(weights: Mat) -> CrossAffinity {
        let n = weights.rows();
        CrossAffinity {
            stages: KernelStages {
                neighbors: vec![Vec::new(); n],
                neighbor_dist: vec![Vec::new(); n],
                shifted: vec![Vec::new(); n],
                scales: vec![1.0; n],
                weights,
            },
        }
    }

    #[test]
    fn nearest_is_one_and_rest_masked() {
        let z = Mat::from_fn(8, 3, |i, j| ((i * 7 + j * 3) as f64 * 0.9).sin() + 0.1);
        let z2 = z.map(|v| v * 1.1 + 0.05);
        let cfg = VicregConfig {
            k_neighbors: 3,
            ..Default::default()
        };
        let a = batch_affinity(&z, &z2, &cfg).unwrap();
        for i in 0..8 {
            let row = a.weights().row(i);
            assert_eq!(row.iter().cloned().fold(0.0, f64::max), 1.0);
            // Far neighbours may underflow to exactly zero.
            assert!(row.iter().filter(|v| **v > 0.0).count() <= 3);
            assert!(row.iter().all(|v| (0.0..=1.0).contains(v)));
        }
        let too_many = VicregConfig {
            k_neighbors: 9,
            ..Default::default()
        };
        assert!(batch_affinity(&z, &z2, &too_many).is_err());
    }

    #[test]
    fn three_row_example() {
        // Views chosen so cosine distances are easy: unit vectors at angles.
        let ang = |t: f64| [t.cos(), t.sin()];
        let z = Mat::from_rows(&[ang(0.0), ang(1.0), ang(2.0)]).unwrap();
        let z2 = Mat::from_rows(&[ang(0.2), ang(0.9), ang(2.5)]).unwrap();
        let cfg = VicregConfig {
            k_neighbors: 2,
            ..Default::default()
        };
        let a = batch_affinity(&z, &z2, &cfg).unwrap();
        let d = |s: f64, t: f64| 1.0 - (s - t).cos();
        // Row 0: neighbours 0 (0.2) then 1 (0.9); shifted (0, d1 - d0).
        let shift = d(0.0, 0.9) - d(0.0, 0.2);
        let scale = 0.2 * shift;
        let w01 = (-(shift * shift) / (scale * scale)).exp();
        let got = a.weights().row(0);
        assert_eq!(got[0], 1.0);
        assert!((got[1] - w01).abs() < 1e-12);
        assert_eq!(got[2], 0.0);
    }

    #[test]
    fn zero_rows_are_orthogonal() {
        let z = Mat::from_rows(&[[0.0, 0.0], [1.0, 0.0], [0.0, 2.0]]).unwrap();
        let d = view_distances(&z, &z);
        assert_eq!(d.row(0), &[1.0, 1.0, 1.0]);
        assert_eq!(d[(1, 1)], 0.0);
        assert!((d[(1, 2)] - 1.0).abs() < 1e-15);
        let cfg = VicregConfig {
            k_neighbors: 2,
            ..Default::default()
        };
        assert!(batch_affinity(&z, &z, &cfg).is_ok());
    }

    #[test]
    fn sampling_examples() {
        let w = Mat::from_rows(&[[0.0, 1.0, 0.0], [0.5, 0.0, 0.5], [0.0, 0.0, 1.0]]).unwrap();
        let a = affinity_from(w.clone());
        let mut hits = 0usize;
        let draws = 100_000u64;
        for s in 0..draws {
            let p = sample_pairs(&a, s);
            assert_eq!(p.index[0], 1);
            assert_eq!(p.index[2], 2);
            for (i, &j) in p.index.iter().enumerate() {
                assert_eq!(p.weight[i], w[(i, j)]);
            }
            hits += (p.index[1] == 0) as usize;
        }
        let f = hits as f64 / draws as f64;
        assert!((f - 0.5).abs() < 0.02, "{f}");
    }
}
