use rand::seq::index::sample;
use serde::{Deserialize, Serialize};

use super::correlation::{correlation, CorrKind};
use crate::error::{Error, Result};
use crate::hierclust::{agglomerate, cophenetic_distances, lca_distances, Dendrogram, LcaMode, LinkageKind};
use crate::numkit::rng::seeded;
use crate::numkit::{pairwise_distances, Mat, Metric};

/// Settings for [`structural_similarity`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SimilarityConfig {
    pub linkage: LinkageKind,
    pub metric: Metric,
    pub lca_mode: LcaMode,
    /// Correlate a seeded random subset of at most this many pairs instead
    /// of all `n(n-1)/2`.
    pub max_pairs: Option<usize>,
    pub seed: u64,
}

impl Default for SimilarityConfig {
    fn default() -> Self {
        SimilarityConfig {
            linkage: LinkageKind::Ward,
            metric: Metric::Cosine,
            lca_mode: LcaMode::Hops,
            max_pairs: None,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LcaSimilarity {
    pub pearson: f64,
    pub spearman: f64,
    pub kendall: f64,
}

/// Structural comparison of two index-aligned embedding sets.
///
/// `coph_d1_to_p2` correlates the cophenetic distances of the first set's
/// tree with the raw pairwise distances of the second set;
/// `coph_d2_to_p1` is the mirror image.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimilarityReport {
    pub lca_pearson: f64,
    pub lca_spearman: f64,
    pub lca_kendall: f64,
    pub coph_d1_to_p2: f64,
    pub coph_d2_to_p1: f64,
    pub n: usize,
    pub n_pairs: usize,
    pub linkage: LinkageKind,
    pub metric: Metric,
    pub lca_mode: LcaMode,
}

impl SimilarityReport {
    pub fn statistics(&self) -> [f64; 5] {
        [
            self.lca_pearson,
            self.lca_spearman,
            self.lca_kendall,
            self.coph_d1_to_p2,
            self.coph_d2_to_p1,
        ]
    }
}

fn pair_subset(total: usize, max_pairs: Option<usize>, seed: u64) -> Option<Vec<usize>> {
    match max_pairs {
        Some(m) if m < total => {
            let mut idx = sample(&mut seeded(seed), total, m).into_vec();
            idx.sort_unstable();
            Some(idx)
        }
        _ => None,
    }
}

fn pick(values: &[f64], subset: &Option<Vec<usize>>) -> Vec<f64> {
    match subset {
        Some(idx) => idx.iter().map(|&i| values[i]).collect(),
        None => values.to_vec(),
    }
}

fn all_kinds(x: &[f64], y: &[f64]) -> Result<LcaSimilarity> {
    Ok(LcaSimilarity {
        pearson: correlation(x, y, CorrKind::Pearson)?,
        spearman: correlation(x, y, CorrKind::Spearman)?,
        kendall: correlation(x, y, CorrKind::Kendall)?,
    })
}

/// Pearson, Spearman and Kendall correlation between the LCA distances of
/// two dendrograms over the same leaves.
pub fn lca_similarity(da: &Dendrogram, db: &Dendrogram, mode: LcaMode) -> Result<LcaSimilarity> {
    if da.n_leaves() != db.n_leaves() {
        return Err(Error::Shape(format!(
            "dendrograms over {} and {} leaves",
            da.n_leaves(),
            db.n_leaves()
        )));
    }
    all_kinds(lca_distances(da, mode).values(), lca_distances(db, mode).values())
}

/// Builds a dendrogram per set and compares them through LCA distances and
/// cross cophenetic correlations.
pub fn structural_similarity(a: &Mat, b: &Mat, cfg: &SimilarityConfig) -> Result<SimilarityReport> {
    let n = a.rows();
    if b.rows() != n {
        return Err(Error::Shape(format!("embedding sets with {} and {} rows", n, b.rows())));
    }
    if n < 3 {
        return Err(Error::InvalidInput(format!(
            "structural similarity needs at least 3 rows, got {n}"
        )));
    }
    let ta = agglomerate(a, cfg.metric, cfg.linkage)?;
    let tb = agglomerate(b, cfg.metric, cfg.linkage)?;
    let total = n * (n - 1) / 2;
    let subset = pair_subset(total, cfg.max_pairs, cfg.seed);

    let lca = all_kinds(
        &pick(lca_distances(&ta, cfg.lca_mode).values(), &subset),
        &pick(lca_distances(&tb, cfg.lca_mode).values(), &subset),
    )?;
    let pa = pick(pairwise_distances(a, cfg.metric)?.values(), &subset);
    let pb = pick(pairwise_distances(b, cfg.metric)?.values(), &subset);
    let ca = pick(cophenetic_distances(&ta).values(), &subset);
    let cb = pick(cophenetic_distances(&tb).values(), &subset);

    Ok(SimilarityReport {
        lca_pearson: lca.pearson,
        lca_spearman: lca.spearman,
        lca_kendall: lca.kendall,
        coph_d1_to_p2: correlation(&ca, &pb, CorrKind::Pearson)?,
        coph_d2_to_p1: correlation(&cb, &pa, CorrKind::Pearson)?,
        n,
        n_pairs: subset.as_ref().map_or(total, Vec::len),
        linkage: cfg.linkage,
        metric: cfg.metric,
        lca_mode: cfg.lca_mode,
    })
}
