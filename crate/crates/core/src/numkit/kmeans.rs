use rand::Rng;

use super::rng::{derive_seed, seeded, SeededRng};
use super::Mat;
use crate::error::{Error, Result};
use crate::partition::Partition;

pub const DEFAULT_RESTARTS: usize = 10;
const MAX_LLOYD_ITERS: usize = 300;

#[derive(Debug, Clone)]
pub struct KMeansFit {
    pub partition: Partition,
    pub centroids: Mat,
    pub inertia: f64,
    /// Inertia after every Lloyd update of the winning restart.
    pub inertia_trace: Vec<f64>,
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Lloyd's k-means with k-means++ seeding; the lowest-inertia result over
/// `restarts` independent seedings is returned.
pub fn kmeans(x: &Mat, k: usize, restarts: usize, seed: u64) -> Result<KMeansFit> {
    let n = x.rows();
    if k == 0 || k > n {
        return Err(Error::InvalidInput(format!(
            "k = {k} clusters requested for {n} points"
        )));
    }
    let mut best: Option<KMeansFit> = None;
    for r in 0..restarts.max(1) {
        let mut rng = seeded(derive_seed(seed, r as u64));
        let fit = lloyd(x, plus_plus(x, k, &mut rng));
        if best.as_ref().is_none_or(|b| fit.inertia < b.inertia) {
            best = Some(fit);
        }
    }
    Ok(best.expect("at least one restart"))
}

fn plus_plus(x: &Mat, k: usize, rng: &mut SeededRng) -> Mat {
    let n = x.rows();
    let mut centers = vec![rng.random_range(0..n)];
    let mut d2: Vec<f64> = (0..n).map(|i| sq_dist(x.row(i), x.row(centers[0]))).collect();
    while centers.len() < k {
        let total: f64 = d2.iter().sum();
        let next = if total > 0.0 {
            let mut target = rng.random::<f64>() * total;
            let mut pick = None;
            for (i, &w) in d2.iter().enumerate() {
                if w > 0.0 {
                    pick = Some(i);
                    if target < w {
                        break;
                    }
                    target -= w;
                }
            }
            pick.expect("positive total weight")
        } else {
            // Fewer distinct points than clusters.
            rng.random_range(0..n)
        };
        centers.push(next);
        for (i, d) in d2.iter_mut().enumerate() {
            *d = d.min(sq_dist(x.row(i), x.row(next)));
        }
    }
    x.select_rows(&centers)
}

fn assign(x: &Mat, centroids: &Mat, labels: &mut [usize]) -> (bool, f64) {
    let mut changed = false;
    let mut inertia = 0.0;
    for (i, label) in labels.iter_mut().enumerate() {
        let row = x.row(i);
        let (best, dist) = (0..centroids.rows())
            .map(|c| (c, sq_dist(row, centroids.row(c))))
            .fold((0, f64::INFINITY), |acc, cur| if cur.1 < acc.1 { cur } else { acc });
        if *label != best {
            changed = true;
            *label = best;
        }
        inertia += dist;
    }
    (changed, inertia)
}

fn inertia_of(x: &Mat, centroids: &Mat, labels: &[usize]) -> f64 {
    labels
        .iter()
        .enumerate()
        .map(|(i, &c)| sq_dist(x.row(i), centroids.row(c)))
        .sum()
}

fn lloyd(x: &Mat, mut centroids: Mat) -> KMeansFit {
    let (n, d) = x.shape();
    let k = centroids.rows();
    let mut labels = vec![usize::MAX; n];
    let mut trace = Vec::new();
    for _ in 0..MAX_LLOYD_ITERS {
        let (changed, _) = assign(x, &centroids, &mut labels);
        if !changed && !trace.is_empty() {
            break;
        }
        let mut sums = vec![0.0; k * d];
        let mut counts = vec![0usize; k];
        for (i, &c) in labels.iter().enumerate() {
            counts[c] += 1;
            for (s, v) in sums[c * d..(c + 1) * d].iter_mut().zip(x.row(i)) {
                *s += v;
            }
        }
        for c in 0..k {
            // An empty cluster keeps its previous centroid.
            if counts[c] > 0 {
                let m = counts[c] as f64;
                for (dst, s) in centroids.row_mut(c).iter_mut().zip(&sums[c * d..(c + 1) * d]) {
                    *dst = s / m;
                }
            }
        }
        trace.push(inertia_of(x, &centroids, &labels));
    }
    let inertia = inertia_of(x, &centroids, &labels);
    KMeansFit {
        partition: Partition::new(labels),
        centroids,
        inertia,
        inertia_trace: trace,
    }
}
