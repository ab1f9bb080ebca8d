use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numkit::{rank_transform, CondensedDist};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CorrKind {
    Pearson,
    Spearman,
    /// Kendall's tau-b.
    Kendall,
}

fn check_pair(x: &[f64], y: &[f64]) -> Result<()> {
    if x.len() != y.len() {
        return Err(Error::Shape(format!("vectors of length {} and {}", x.len(), y.len())));
    }
    if x.len() < 2 {
        return Err(Error::InvalidInput(format!(
            "correlation needs at least 2 observations, got {}",
            x.len()
        )));
    }
    if let Some(i) = x.iter().chain(y).position(|v| !v.is_finite()) {
        return Err(Error::NonFinite(format!("observation {}", i % x.len())));
    }
    Ok(())
}

pub fn correlation(x: &[f64], y: &[f64], kind: CorrKind) -> Result<f64> {
    check_pair(x, y)?;
    match kind {
        CorrKind::Pearson => pearson_unchecked(x, y),
        CorrKind::Spearman => pearson_unchecked(&rank_transform(x)?, &rank_transform(y)?),
        CorrKind::Kendall => kendall_tau_b_unchecked(x, y),
    }
}

pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    correlation(x, y, CorrKind::Pearson)
}

pub fn spearman(x: &[f64], y: &[f64]) -> Result<f64> {
    correlation(x, y, CorrKind::Spearman)
}

pub fn kendall_tau_b(x: &[f64], y: &[f64]) -> Result<f64> {
    correlation(x, y, CorrKind::Kendall)
}

fn pearson_unchecked(x: &[f64], y: &[f64]) -> Result<f64> {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::UndefinedCorrelation("zero variance".into()));
    }
    Ok((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// Tau-b in O(n log n) (Knight's algorithm): sort by `(x, y)`, then count
/// the inversions a stable merge sort on `y` has to undo.
fn kendall_tau_b_unchecked(x: &[f64], y: &[f64]) -> Result<f64> {
    let n = x.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| x[a].total_cmp(&x[b]).then(y[a].total_cmp(&y[b])));

    let pairs = |t: u64| t * t.saturating_sub(1) / 2;
    let n0 = pairs(n as u64);

    // Ties in x, and joint ties in (x, y).
    let (mut tied_x, mut tied_xy) = (0u64, 0u64);
    let mut i = 0;
    while i < n {
        let mut j = i + 1;
        while j < n && x[order[j]] == x[order[i]] {
            j += 1;
        }
        tied_x += pairs((j - i) as u64);
        let mut a = i;
        while a < j {
            let mut b = a + 1;
            while b < j && y[order[b]] == y[order[a]] {
                b += 1;
            }
            tied_xy += pairs((b - a) as u64);
            a = b;
        }
        i = j;
    }

    let mut ys: Vec<f64> = order.iter().map(|&k| y[k]).collect();
    let mut buf = vec![0.0; n];
    let swaps = merge_count(&mut ys, &mut buf);

    let mut tied_y = 0u64;
    let mut i = 0;
    while i < n {
        let mut j = i + 1;
        while j < n && ys[j] == ys[i] {
            j += 1;
        }
        tied_y += pairs((j - i) as u64);
        i = j;
    }

    if tied_x == n0 || tied_y == n0 {
        return Err(Error::UndefinedCorrelation("zero variance".into()));
    }
    let numer = n0 as i128 - tied_x as i128 - tied_y as i128 + tied_xy as i128 - 2 * swaps as i128;
    let a = (n0 - tied_x) as f64;
    let b = (n0 - tied_y) as f64;
    Ok((numer as f64 / (a * b).sqrt()).clamp(-1.0, 1.0))
}

/// Stable merge sort of `v`, returning the number of strict inversions.
fn merge_count(v: &mut [f64], buf: &mut [f64]) -> u64 {
    let n = v.len();
    if n < 2 {
        return 0;
    }
    let mid = n / 2;
    let mut swaps = {
        let (lo, hi) = v.split_at_mut(mid);
        let (blo, bhi) = buf.split_at_mut(mid);
        merge_count(lo, blo) + merge_count(hi, bhi)
    };
    let (mut i, mut j, mut k) = (0, mid, 0);
    while i < mid && j < n {
        if v[j] < v[i] {
            buf[k] = v[j];
            swaps += (mid - i) as u64;
            j += 1;
        } else {
            buf[k] = v[i];
            i += 1;
        }
        k += 1;
    }
    buf[k..k + mid - i].copy_from_slice(&v[i..mid]);
    k += mid - i;
    buf[k..k + n - j].copy_from_slice(&v[j..n]);
    v.copy_from_slice(&buf[..n]);
    swaps
}

/// Pearson correlation between cophenetic distances `t` and raw distances
/// `d` over all pairs.
pub fn cophenetic_correlation(t: &CondensedDist, d: &CondensedDist) -> Result<f64> {
    if t.n() != d.n() {
        return Err(Error::Shape(format!(
            "distance sets over {} and {} items",
            t.n(),
            d.n()
        )));
    }
    pearson(t.values(), d.values())
}
