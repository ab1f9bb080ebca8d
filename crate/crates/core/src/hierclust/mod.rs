//! Agglomerative hierarchical clustering and the tree distances read off
//! the resulting dendrogram.

mod dendrogram;

pub use dendrogram::{Dendrogram, LcaMode, Merge};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numkit::{pairwise_distances, CondensedDist, Mat, Metric};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum LinkageKind {
    #[default]
    Ward,
    Average,
    Complete,
    Single,
}

impl std::str::FromStr for LinkageKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<LinkageKind> {
        match s {
            "ward" => Ok(LinkageKind::Ward),
            "average" => Ok(LinkageKind::Average),
            "complete" => Ok(LinkageKind::Complete),
            "single" => Ok(LinkageKind::Single),
            other => Err(Error::InvalidInput(format!("unknown linkage '{other}'"))),
        }
    }
}

impl std::fmt::Display for LinkageKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            LinkageKind::Ward => "ward",
            LinkageKind::Average => "average",
            LinkageKind::Complete => "complete",
            LinkageKind::Single => "single",
        })
    }
}

impl LinkageKind {
    /// Lance–Williams distance from cluster `k` to the union of `i` and `j`.
    ///
    /// Ward treats its inputs as distances and combines their squares, so
    /// a non-Euclidean metric enters the recurrence squared.
    fn update(self, d_ki: f64, d_kj: f64, d_ij: f64, n_i: f64, n_j: f64, n_k: f64) -> f64 {
        match self {
            LinkageKind::Single => d_ki.min(d_kj),
            LinkageKind::Complete => d_ki.max(d_kj),
            LinkageKind::Average => (n_i * d_ki + n_j * d_kj) / (n_i + n_j),
            LinkageKind::Ward => {
                let t = n_i + n_j + n_k;
                let sq = ((n_i + n_k) * d_ki * d_ki + (n_j + n_k) * d_kj * d_kj - n_k * d_ij * d_ij) / t;
                sq.max(0.0).sqrt()
            }
        }
    }
}

/// Clusters the rows of `x` bottom-up under `metric` and `linkage`.
pub fn agglomerate(x: &Mat, metric: Metric, linkage: LinkageKind) -> Result<Dendrogram> {
    if x.rows() < 2 {
        return Err(Error::InvalidInput(format!(
            "agglomerative clustering needs at least 2 points, got {}",
            x.rows()
        )));
    }
    Ok(agglomerate_distances(&pairwise_distances(x, metric)?, linkage))
}

/// Naive O(n³) agglomeration over precomputed distances.
///
/// The closest active pair is merged at each step; ties go to the
/// lexicographically smallest `(i, j)` slot pair. The merged cluster
/// occupies the lower slot.
pub fn agglomerate_distances(dist: &CondensedDist, linkage: LinkageKind) -> Dendrogram {
    let n = dist.n();
    assert!(n >= 2, "need at least two leaves");
    let mut d = dist.to_square().into_vec();
    let mut active: Vec<usize> = (0..n).collect();
    let mut ids: Vec<usize> = (0..n).collect();
    let mut sizes = vec![1usize; n];
    let mut merges = Vec::with_capacity(n - 1);

    for r in 0..n - 1 {
        let (mut bi, mut bj, mut best) = (usize::MAX, usize::MAX, f64::INFINITY);
        for (a, &i) in active.iter().enumerate() {
            for &j in &active[a + 1..] {
                let v = d[i * n + j];
                if v < best {
                    (bi, bj, best) = (i, j, v);
                }
            }
        }
        let (n_i, n_j) = (sizes[bi] as f64, sizes[bj] as f64);
        for &k in &active {
            if k == bi || k == bj {
                continue;
            }
            let upd = linkage.update(d[k * n + bi], d[k * n + bj], best, n_i, n_j, sizes[k] as f64);
            // All four linkages are monotone, so the merged cluster cannot be
            // closer to anyone than `best`; this only absorbs rounding.
            let upd = upd.max(best);
            d[k * n + bi] = upd;
            d[bi * n + k] = upd;
        }
        merges.push(Merge {
            left: ids[bi].min(ids[bj]),
            right: ids[bi].max(ids[bj]),
            height: best,
            size: sizes[bi] + sizes[bj],
        });
        ids[bi] = n + r;
        sizes[bi] += sizes[bj];
        active.retain(|&k| k != bj);
    }
    Dendrogram::from_merges_unchecked(n, merges)
}

/// Cophenetic distance: height of the merge that first joins each pair.
pub fn cophenetic_distances(d: &Dendrogram) -> CondensedDist {
    d.lca_distances(LcaMode::Height)
}

/// LCA distance of every leaf pair under `mode`.
pub fn lca_distances(d: &Dendrogram, mode: LcaMode) -> CondensedDist {
    d.lca_distances(mode)
}
