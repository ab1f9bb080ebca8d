use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numkit::CondensedDist;

pub const CSV_HEADER: &str = "left,right,height,size";

/// One agglomeration step. Leaves are `0..n`, merge `r` creates node `n + r`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Merge {
    pub left: usize,
    pub right: usize,
    pub height: f64,
    pub size: usize,
}

/// How the distance between two leaves is read off the tree.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum LcaMode {
    /// Number of edges on the path leaf → LCA → leaf.
    #[default]
    Hops,
    /// Merge height of the LCA (the cophenetic distance).
    Height,
}

impl std::str::FromStr for LcaMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<LcaMode> {
        match s {
            "hops" => Ok(LcaMode::Hops),
            "height" => Ok(LcaMode::Height),
            other => Err(Error::InvalidInput(format!("unknown LCA mode '{other}'"))),
        }
    }
}

impl std::fmt::Display for LcaMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            LcaMode::Hops => "hops",
            LcaMode::Height => "height",
        })
    }
}

/// Binary merge tree over `n_leaves` leaves.
#[derive(Debug, Clone, PartialEq)]
pub struct Dendrogram {
    n_leaves: usize,
    merges: Vec<Merge>,
}

impl Dendrogram {
    /// Validates a merge table: `n - 1` merges, children defined before use
    /// and consumed once, consistent sizes, non-decreasing finite heights.
    pub fn new(n_leaves: usize, merges: Vec<Merge>) -> Result<Dendrogram> {
        if n_leaves < 2 {
            return Err(Error::InvalidInput(format!("{n_leaves} leaves")));
        }
        if merges.len() != n_leaves - 1 {
            return Err(Error::InvalidInput(format!(
                "{} merges for {n_leaves} leaves",
                merges.len()
            )));
        }
        let mut size = vec![1usize; n_leaves];
        let mut used = vec![false; 2 * n_leaves - 1];
        let mut prev = 0.0;
        for (r, m) in merges.iter().enumerate() {
            let limit = n_leaves + r;
            for child in [m.left, m.right] {
                if child >= limit {
                    return Err(Error::InvalidInput(format!(
                        "merge {r} references node {child} before it exists"
                    )));
                }
                if used[child] {
                    return Err(Error::InvalidInput(format!("merge {r} reuses node {child}")));
                }
                used[child] = true;
            }
            if m.left == m.right {
                return Err(Error::InvalidInput(format!(
                    "merge {r} joins node {} with itself",
                    m.left
                )));
            }
            if m.size != size[m.left] + size[m.right] {
                return Err(Error::InvalidInput(format!(
                    "merge {r} has size {}, children sum to {}",
                    m.size,
                    size[m.left] + size[m.right]
                )));
            }
            if !m.height.is_finite() || m.height < prev || m.height < 0.0 {
                return Err(Error::InvalidInput(format!(
                    "merge {r} height {} breaks monotonicity",
                    m.height
                )));
            }
            prev = m.height;
            size.push(m.size);
        }
        Ok(Dendrogram { n_leaves, merges })
    }

    pub(crate) fn from_merges_unchecked(n_leaves: usize, merges: Vec<Merge>) -> Dendrogram {
        debug_assert!(Dendrogram::new(n_leaves, merges.clone()).is_ok());
        Dendrogram { n_leaves, merges }
    }

    pub fn n_leaves(&self) -> usize {
        self.n_leaves
    }

    pub fn merges(&self) -> &[Merge] {
        &self.merges
    }

    /// Same tree with the two children of every merge swapped.
    pub fn mirrored(&self) -> Dendrogram {
        let merges = self
            .merges
            .iter()
            .map(|m| Merge {
                left: m.right,
                right: m.left,
                ..*m
            })
            .collect();
        Dendrogram {
            n_leaves: self.n_leaves,
            merges,
        }
    }

    /// Leaves under each node with their depth below that node, built
    /// merge by merge. Pairs are scored once, at the merge that unites them.
    pub fn lca_distances(&self, mode: LcaMode) -> CondensedDist {
        let n = self.n_leaves;
        let mut values = vec![0.0; n * (n - 1) / 2];
        let mut members: Vec<Vec<(usize, u32)>> = (0..n).map(|i| vec![(i, 0)]).collect();
        members.reserve(n - 1);
        for m in &self.merges {
            let left = std::mem::take(&mut members[m.left]);
            let right = std::mem::take(&mut members[m.right]);
            for &(a, da) in &left {
                for &(b, db) in &right {
                    let (i, j) = if a < b { (a, b) } else { (b, a) };
                    values[CondensedDist::index(n, i, j)] = match mode {
                        LcaMode::Height => m.height,
                        LcaMode::Hops => f64::from(da + db + 2),
                    };
                }
            }
            let mut merged = left;
            merged.extend(right);
            merged.iter_mut().for_each(|(_, d)| *d += 1);
            members.push(merged);
        }
        CondensedDist::from_raw(n, values)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for m in &self.merges {
            out.push_str(&format!("{},{},{},{}\n", m.left, m.right, m.height, m.size));
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Dendrogram> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        match lines.next() {
            Some(h) if h.trim() == CSV_HEADER => {}
            other => {
                return Err(Error::InvalidInput(format!(
                    "expected header '{CSV_HEADER}', found {other:?}"
                )))
            }
        }
        let mut merges = Vec::new();
        for (r, line) in lines.enumerate() {
            let f: Vec<&str> = line.split(',').map(str::trim).collect();
            if f.len() != 4 {
                return Err(Error::InvalidInput(format!("merge line {r}: expected 4 fields")));
            }
            let bad = |what: &str| Error::InvalidInput(format!("merge line {r}: bad {what}"));
            merges.push(Merge {
                left: f[0].parse().map_err(|_| bad("left"))?,
                right: f[1].parse().map_err(|_| bad("right"))?,
                height: f[2].parse().map_err(|_| bad("height"))?,
                size: f[3].parse().map_err(|_| bad("size"))?,
            });
        }
        Dendrogram::new(merges.len() + 1, merges)
    }
}
