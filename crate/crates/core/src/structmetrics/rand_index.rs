use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::partition::Partition;

fn pairs(t: u128) -> u128 {
    t * t.saturating_sub(1) / 2
}

/// Fraction of item pairs on which `a` and `b` agree (together in both, or
/// apart in both), via contingency-table pair counts.
pub fn rand_index(a: &Partition, b: &Partition) -> Result<f64> {
    a.check_same_len(b)?;
    let n = a.len();
    if n < 2 {
        return Err(Error::InvalidInput(format!("Rand index over {n} items")));
    }
    let mut joint: HashMap<(usize, usize), u128> = HashMap::new();
    let mut rows: HashMap<usize, u128> = HashMap::new();
    let mut cols: HashMap<usize, u128> = HashMap::new();
    for (&x, &y) in a.labels().iter().zip(b.labels()) {
        *joint.entry((x, y)).or_default() += 1;
        *rows.entry(x).or_default() += 1;
        *cols.entry(y).or_default() += 1;
    }
    let together_both: u128 = joint.values().map(|&c| pairs(c)).sum();
    let together_a: u128 = rows.values().map(|&c| pairs(c)).sum();
    let together_b: u128 = cols.values().map(|&c| pairs(c)).sum();
    let total = pairs(n as u128);
    // agreements = total - (together in exactly one of the two partitions)
    let agree = total + 2 * together_both - together_a - together_b;
    Ok(agree as f64 / total as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        let a = Partition::new(vec![0, 0, 1, 1]);
        assert_eq!(rand_index(&a, &a).unwrap(), 1.0);
        // Pairs: (01) a-same b-diff, (02) diff/same, (03) diff/diff,
        // (12) diff/diff, (13) diff/same, (23) same/diff -> 2 of 6 agree.
        let b = Partition::new(vec![0, 1, 0, 1]);
        assert_eq!(rand_index(&a, &b).unwrap(), 2.0 / 6.0);
        let relabeled = Partition::new(vec![7, 7, 3, 3]);
        assert_eq!(rand_index(&a, &relabeled).unwrap(), 1.0);
    }

    #[test]
    fn errors() {
        let a = Partition::new(vec![0, 0, 1]);
        assert!(rand_index(&a, &Partition::new(vec![0, 1])).is_err());
        assert!(rand_index(&Partition::new(vec![0]), &Partition::new(vec![0])).is_err());
    }
}
