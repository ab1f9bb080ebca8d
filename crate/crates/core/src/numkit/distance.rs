use serde::{Deserialize, Serialize};

use super::Mat;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    #[default]
    Cosine,
    Euclidean,
}

impl std::str::FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Metric> {
        match s {
            "cosine" => Ok(Metric::Cosine),
            "euclidean" => Ok(Metric::Euclidean),
            other => Err(Error::InvalidInput(format!("unknown metric '{other}'"))),
        }
    }
}

impl std::fmt::Display for Metric {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Metric::Cosine => "cosine",
            Metric::Euclidean => "euclidean",
        })
    }
}

/// Upper triangle of a symmetric distance matrix, pair `(i < j)` stored at
/// `i*n - i*(i+1)/2 + (j - i - 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CondensedDist {
    n: usize,
    values: Vec<f64>,
}

impl CondensedDist {
    pub fn new(n: usize, values: Vec<f64>) -> Result<CondensedDist> {
        if values.len() != n * n.saturating_sub(1) / 2 {
            return Err(Error::Shape(format!("{} condensed values for {n} items", values.len())));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite() || **v < 0.0) {
            return Err(Error::InvalidInput(format!("distance {v} is not finite and >= 0")));
        }
        Ok(CondensedDist { n, values })
    }

    pub(crate) fn from_raw(n: usize, values: Vec<f64>) -> CondensedDist {
        debug_assert_eq!(values.len(), n * n.saturating_sub(1) / 2);
        CondensedDist { n, values }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    #[inline]
    pub fn index(n: usize, i: usize, j: usize) -> usize {
        debug_assert!(i < j && j < n);
        i * n - i * (i + 1) / 2 + (j - i - 1)
    }

    /// Distance between `i` and `j` in either order; zero on the diagonal.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        match i.cmp(&j) {
            std::cmp::Ordering::Equal => 0.0,
            std::cmp::Ordering::Less => self.values[Self::index(self.n, i, j)],
            std::cmp::Ordering::Greater => self.values[Self::index(self.n, j, i)],
        }
    }

    pub fn to_square(&self) -> Mat {
        Mat::from_fn(self.n, self.n, |i, j| self.get(i, j))
    }
}

fn unit_rows(x: &Mat, name: &str) -> Result<Vec<Vec<f64>>> {
    x.row_iter()
        .enumerate()
        .map(|(i, r)| {
            let norm = r.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm == 0.0 {
                return Err(Error::Degenerate(format!(
                    "row {i} of {name} has zero norm; cosine distance is undefined"
                )));
            }
            Ok(r.iter().map(|v| v / norm).collect())
        })
        .collect()
}

/// `1 - cos` for unit vectors, evaluated as `‖a - b‖² / 2` so identical
/// directions give exactly zero.
#[inline]
fn cosine_unit(a: &[f64], b: &[f64]) -> f64 {
    let sq: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
    (0.5 * sq).min(2.0)
}

#[inline]
fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Full `x.rows × y.rows` distance matrix between the rows of `x` and `y`.
pub fn cross_distances(x: &Mat, y: &Mat, metric: Metric) -> Result<Mat> {
    if x.cols() != y.cols() {
        return Err(Error::Shape(format!(
            "row dimensions {} and {} differ",
            x.cols(),
            y.cols()
        )));
    }
    let mut out = Mat::zeros(x.rows(), y.rows());
    match metric {
        Metric::Cosine => {
            let ux = unit_rows(x, "x")?;
            let uy = unit_rows(y, "y")?;
            for (i, a) in ux.iter().enumerate() {
                for (j, b) in uy.iter().enumerate() {
                    out[(i, j)] = cosine_unit(a, b);
                }
            }
        }
        Metric::Euclidean => {
            for i in 0..x.rows() {
                for j in 0..y.rows() {
                    out[(i, j)] = euclidean(x.row(i), y.row(j));
                }
            }
        }
    }
    Ok(out)
}

/// Condensed self-distances between all row pairs of `x`.
pub fn pairwise_distances(x: &Mat, metric: Metric) -> Result<CondensedDist> {
    let n = x.rows();
    let mut values = Vec::with_capacity(n * (n - 1) / 2);
    match metric {
        Metric::Cosine => {
            let u = unit_rows(x, "x")?;
            for i in 0..n {
                for j in (i + 1)..n {
                    values.push(cosine_unit(&u[i], &u[j]));
                }
            }
        }
        Metric::Euclidean => {
            for i in 0..n {
                for j in (i + 1)..n {
                    values.push(euclidean(x.row(i), x.row(j)));
                }
            }
        }
    }
    Ok(CondensedDist::from_raw(n, values))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn worked_examples() {
        let a = Mat::from_rows(&[[0.6, 0.8]]).unwrap();
        assert!(cross_distances(&a, &a, Metric::Cosine).unwrap()[(0, 0)].abs() < 1e-15);

        let x = Mat::from_rows(&[[1.0, 0.0]]).unwrap();
        let y = Mat::from_rows(&[[0.0, 1.0]]).unwrap();
        assert_eq!(cross_distances(&x, &y, Metric::Cosine).unwrap()[(0, 0)], 1.0);

        let p = Mat::from_rows(&[[0.0, 0.0], [3.0, 4.0]]).unwrap();
        assert_eq!(pairwise_distances(&p, Metric::Euclidean).unwrap().get(0, 1), 5.0);
    }

    #[test]
    fn zero_row_under_cosine_is_degenerate() {
        let p = Mat::from_rows(&[[0.0, 0.0], [3.0, 4.0]]).unwrap();
        assert!(matches!(
            pairwise_distances(&p, Metric::Cosine),
            Err(Error::Degenerate(_))
        ));
        // Euclidean has no such restriction.
        assert!(pairwise_distances(&p, Metric::Euclidean).is_ok());
    }

    #[test]
    fn dimension_mismatch() {
        let x = Mat::zeros(2, 3);
        let y = Mat::zeros(2, 2);
        assert!(matches!(
            cross_distances(&x, &y, Metric::Euclidean),
            Err(Error::Shape(_))
        ));
    }

    #[test]
    fn condensed_index_layout() {
        let n = 5;
        let mut k = 0;
        for i in 0..n {
            for j in (i + 1)..n {
                assert_eq!(CondensedDist::index(n, i, j), k);
                k += 1;
            }
        }
    }
}
