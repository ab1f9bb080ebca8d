//! Label-based evaluation protocols over a class hierarchy.

use std::collections::HashMap;

use super::hierarchy::Hierarchy;
use super::rand_index::rand_index;
use crate::error::{Error, Result};
use crate::graphspec::{spectral_clustering, GraphConfig};
use crate::numkit::rng::derive_seed;
use crate::numkit::{cross_distances, Mat, Metric};
use crate::partition::Partition;

/// Rand index per hierarchy level (coarsest first) between spectral
/// clustering of `x` with as many clusters as the level has classes, and
/// that level's labels.
pub fn hierarchical_rand(x: &Mat, h: &Hierarchy, cfg: &GraphConfig, seed: u64) -> Result<Vec<f64>> {
    if h.n_items() != x.rows() {
        return Err(Error::Shape(format!(
            "{} embeddings but {} labelled items",
            x.rows(),
            h.n_items()
        )));
    }
    (0..h.depth())
        .map(|l| {
            let k = h.n_classes(l);
            let found = spectral_clustering(x, k, cfg, derive_seed(seed, l as u64))?;
            rand_index(&found, h.level(l))
        })
        .collect()
}

/// Rand index against `labels` while the number of clusters sweeps over
/// `cluster_counts`.
pub fn rand_sweep(
    x: &Mat,
    labels: &Partition,
    cluster_counts: impl IntoIterator<Item = usize>,
    cfg: &GraphConfig,
    seed: u64,
) -> Result<Vec<(usize, f64)>> {
    if labels.len() != x.rows() {
        return Err(Error::Shape(format!(
            "{} embeddings but {} labels",
            x.rows(),
            labels.len()
        )));
    }
    cluster_counts
        .into_iter()
        .map(|k| {
            let found = spectral_clustering(x, k, cfg, derive_seed(seed, k as u64))?;
            Ok((k, rand_index(&found, labels)?))
        })
        .collect()
}

/// k-NN classification evaluated at every hierarchy level.
///
/// The finest class is predicted by majority vote over the `k` nearest
/// training rows under cosine distance; a tied vote goes to the class whose
/// closest member ranks nearest. Coarser predictions are ancestors of the
/// finest one. Returns accuracy per level, coarsest first. Class ids are
/// finest-level ids of `h`.
pub fn knn_hierarchical_classify(
    train: &Mat,
    train_labels: &[usize],
    test: &Mat,
    test_labels: &[usize],
    h: &Hierarchy,
    k: usize,
) -> Result<Vec<f64>> {
    if train_labels.len() != train.rows() || test_labels.len() != test.rows() {
        return Err(Error::Shape("label count does not match row count".into()));
    }
    if k == 0 || k > train.rows() {
        return Err(Error::InvalidInput(format!(
            "k = {k} neighbours with {} training rows",
            train.rows()
        )));
    }
    let n_fine = h.n_classes(h.depth() - 1);
    if let Some(bad) = train_labels.iter().chain(test_labels).find(|&&c| c >= n_fine) {
        return Err(Error::InvalidInput(format!("class id {bad} not in the hierarchy")));
    }
    let dist = cross_distances(test, train, Metric::Cosine)?;
    let mut correct = vec![0usize; h.depth()];
    for (t, &truth) in test_labels.iter().enumerate() {
        let row = dist.row(t);
        let mut order: Vec<usize> = (0..train.rows()).collect();
        order.sort_by(|&a, &b| row[a].total_cmp(&row[b]).then(a.cmp(&b)));
        // class -> (votes, rank of its nearest neighbour)
        let mut votes: HashMap<usize, (usize, usize)> = HashMap::new();
        for (rank, &j) in order[..k].iter().enumerate() {
            votes.entry(train_labels[j]).or_insert((0, rank)).0 += 1;
        }
        let (&pred, _) = votes
            .iter()
            .max_by(|a, b| a.1 .0.cmp(&b.1 .0).then(b.1 .1.cmp(&a.1 .1)))
            .expect("k >= 1");
        for (l, c) in correct.iter_mut().enumerate() {
            if h.coarsen(pred, l) == h.coarsen(truth, l) {
                *c += 1;
            }
        }
    }
    let m = test.rows() as f64;
    Ok(correct.into_iter().map(|c| c as f64 / m).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_level() -> Hierarchy {
        Hierarchy::new(vec![vec![0, 0, 1, 1], vec![0, 1, 2, 3]]).unwrap()
    }

    #[test]
    fn knn_duplicate_rows_recover_own_label() {
        let train = Mat::from_rows(&[[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0], [1.0, 1.0, 1.0]]).unwrap();
        let labels = [0, 1, 2, 3];
        let acc = knn_hierarchical_classify(&train, &labels, &train, &labels, &two_level(), 1).unwrap();
        assert_eq!(acc, vec![1.0, 1.0]);
    }

    #[test]
    fn knn_tie_goes_to_nearest_class() {
        let train = Mat::from_rows(&[[1.0, 0.1], [1.0, -0.3], [0.2, 1.0], [-0.3, 1.0]]).unwrap();
        let labels = [0, 1, 0, 1];
        let test = Mat::from_rows(&[[1.0, 0.0]]).unwrap();
        // Two votes each among all 4; class 0 owns the closest row.
        let acc = knn_hierarchical_classify(&train, &labels, &test, &[0], &two_level(), 4).unwrap();
        assert_eq!(acc, vec![1.0, 1.0]);
    }

    #[test]
    fn knn_errors() {
        let train = Mat::identity(2);
        let h = two_level();
        assert!(knn_hierarchical_classify(&train, &[0, 1], &train, &[0, 1], &h, 3).is_err());
        assert!(knn_hierarchical_classify(&train, &[0], &train, &[0, 1], &h, 1).is_err());
        assert!(knn_hierarchical_classify(&train, &[0, 9], &train, &[0, 1], &h, 1).is_err());
    }

    #[test]
    fn single_class_level_scores_one() {
        let x = Mat::from_fn(12, 3, |i, j| ((i * 5 + j * 7) % 13) as f64 + 1.0);
        let h = Hierarchy::new(vec![vec![0; 12]]).unwrap();
        assert_eq!(
            hierarchical_rand(&x, &h, &GraphConfig::default(), 0).unwrap(),
            vec![1.0]
        );
    }
}
