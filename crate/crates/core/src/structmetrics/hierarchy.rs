use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::partition::Partition;

/// Nested class labels for a set of items.
///
/// Level 0 is the coarsest, the last level the finest. Class ids are dense
/// per level (`0..n_classes(level)`), and every class below level 0 has a
/// single parent class on the level above.
#[derive(Debug, Clone, PartialEq)]
pub struct Hierarchy {
    levels: Vec<Partition>,
    /// `parents[l][c]`: parent on level `l - 1` of class `c` on level `l`.
    /// `parents[0]` is empty.
    parents: Vec<Vec<usize>>,
    names: Vec<Vec<String>>,
}

impl Hierarchy {
    /// Builds a hierarchy from per-level label vectors, coarsest first.
    /// Labels are relabelled densely in order of first appearance.
    pub fn new(levels: Vec<Vec<usize>>) -> Result<Hierarchy> {
        let names = levels
            .iter()
            .map(|l| {
                let mut seen = Vec::new();
                for v in l {
                    if !seen.contains(v) {
                        seen.push(*v);
                    }
                }
                seen.iter().map(|v| v.to_string()).collect()
            })
            .collect();
        Self::build(
            levels.into_iter().map(|l| Partition::new(l).canonical()).collect(),
            names,
        )
    }

    fn build(levels: Vec<Partition>, names: Vec<Vec<String>>) -> Result<Hierarchy> {
        let Some(first) = levels.first() else {
            return Err(Error::InvalidInput("hierarchy without levels".into()));
        };
        let n = first.len();
        if n == 0 {
            return Err(Error::InvalidInput("hierarchy without items".into()));
        }
        if let Some(l) = levels.iter().position(|l| l.len() != n) {
            return Err(Error::Shape(format!(
                "level {} labels {} items, expected {n}",
                l + 1,
                levels[l].len()
            )));
        }
        let mut parents = vec![Vec::new()];
        for l in 1..levels.len() {
            let mut map: Vec<Option<usize>> = vec![None; levels[l].n_clusters()];
            for (item, (&fine, &coarse)) in levels[l].labels().iter().zip(levels[l - 1].labels()).enumerate() {
                match map[fine] {
                    None => map[fine] = Some(coarse),
                    Some(p) if p == coarse => {}
                    Some(_) => {
                        return Err(Error::InvalidInput(format!(
                            "class '{}' on level {} has more than one parent (item {item})",
                            names[l][fine],
                            l + 1
                        )))
                    }
                }
            }
            parents.push(map.into_iter().map(|p| p.expect("dense ids")).collect());
        }
        Ok(Hierarchy { levels, parents, names })
    }

    /// Parses `item_id,level1,...,levelL` with a header line. Item ids must
    /// be a permutation of `0..n`; labels are arbitrary strings.
    pub fn from_csv(text: &str) -> Result<Hierarchy> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header: Vec<&str> = lines
            .next()
            .ok_or_else(|| Error::InvalidInput("empty hierarchy file".into()))?
            .split(',')
            .map(str::trim)
            .collect();
        if header.first() != Some(&"item_id") || header.len() < 2 {
            return Err(Error::InvalidInput(
                "hierarchy header must be 'item_id,level1,...,levelL'".into(),
            ));
        }
        let depth = header.len() - 1;
        let mut rows: Vec<(usize, Vec<String>)> = Vec::new();
        for (r, line) in lines.enumerate() {
            let f: Vec<&str> = line.split(',').map(str::trim).collect();
            if f.len() != header.len() {
                return Err(Error::InvalidInput(format!(
                    "hierarchy line {}: {} fields, expected {}",
                    r + 2,
                    f.len(),
                    header.len()
                )));
            }
            let id = f[0]
                .parse::<usize>()
                .map_err(|_| Error::InvalidInput(format!("hierarchy line {}: bad item id '{}'", r + 2, f[0])))?;
            rows.push((id, f[1..].iter().map(|s| s.to_string()).collect()));
        }
        let n = rows.len();
        let mut slot: Vec<Option<Vec<String>>> = vec![None; n];
        for (id, labels) in rows {
            if id >= n || slot[id].is_some() {
                return Err(Error::InvalidInput(format!(
                    "item ids must be a permutation of 0..{n} (offending id {id})"
                )));
            }
            slot[id] = Some(labels);
        }
        let mut levels = Vec::with_capacity(depth);
        let mut names = Vec::with_capacity(depth);
        for l in 0..depth {
            let mut ids: HashMap<&str, usize> = HashMap::new();
            let mut level_names = Vec::new();
            let labels = slot
                .iter()
                .map(|s| {
                    let name = s.as_ref().expect("all slots filled")[l].as_str();
                    *ids.entry(name).or_insert_with(|| {
                        level_names.push(name.to_string());
                        level_names.len() - 1
                    })
                })
                .collect();
            levels.push(Partition::new(labels));
            names.push(level_names);
        }
        Self::build(levels, names)
    }

    pub fn n_items(&self) -> usize {
        self.levels[0].len()
    }

    pub fn depth(&self) -> usize {
        self.levels.len()
    }

    pub fn level(&self, l: usize) -> &Partition {
        &self.levels[l]
    }

    pub fn finest(&self) -> &Partition {
        self.levels.last().expect("non-empty")
    }

    pub fn n_classes(&self, l: usize) -> usize {
        self.names[l].len()
    }

    pub fn class_name(&self, l: usize, class: usize) -> &str {
        &self.names[l][class]
    }

    /// Ancestor on `level` of finest-level class `fine`.
    pub fn coarsen(&self, fine: usize, level: usize) -> usize {
        let mut c = fine;
        for l in ((level + 1)..self.depth()).rev() {
            c = self.parents[l][c];
        }
        c
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_coarsens() {
        let csv = "item_id,level1,level2\n2,animal,cat\n0,animal,dog\n1,plant,tree\n3,animal,dog\n";
        let h = Hierarchy::from_csv(csv).unwrap();
        assert_eq!(h.n_items(), 4);
        assert_eq!(h.depth(), 2);
        assert_eq!(h.level(0).labels(), &[0, 1, 0, 0]);
        assert_eq!(h.finest().labels(), &[0, 1, 2, 0]);
        assert_eq!(h.class_name(1, 2), "cat");
        assert_eq!(h.coarsen(2, 0), 0);
        assert_eq!(h.coarsen(1, 0), 1);
        assert_eq!(h.coarsen(1, 1), 1);
        assert_eq!(h.n_classes(0), 2);
        assert_eq!(h.n_classes(1), 3);
    }

    #[test]
    fn rejects_inconsistent_parents() {
        let csv = "item_id,level1,level2\n0,a,x\n1,b,x\n";
        assert!(Hierarchy::from_csv(csv).is_err());
        assert!(Hierarchy::new(vec![vec![0, 1], vec![5, 5]]).is_err());
    }

    #[test]
    fn rejects_bad_ids_and_headers() {
        assert!(Hierarchy::from_csv("item_id,l1\n0,a\n0,b\n").is_err());
        assert!(Hierarchy::from_csv("item_id,l1\n0,a\n2,b\n").is_err());
        assert!(Hierarchy::from_csv("id,l1\n0,a\n").is_err());
        assert!(Hierarchy::from_csv("item_id,l1\n0,a,b\n").is_err());
    }
}
