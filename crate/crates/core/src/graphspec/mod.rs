//! Graph construction and spectral machinery: Laplacians, random walks,
//! Laplacian eigenmaps, the SpectralNet objective and spectral clustering.

mod affinity;
mod clustering;

pub use affinity::{local_scaled_kernel, percentile, KernelParams, KernelStages};
pub use clustering::{knn_affinity, spectral_clustering, GraphConfig};

use rand::Rng;

use crate::error::{Error, Result};
use crate::numkit::rng::seeded;
use crate::numkit::{fix_sign, symmetric_eig, Mat};

/// Eigenvalues at or below this fraction of the largest one count as zero.
pub const NULL_EIGEN_REL_TOL: f64 = 1e-10;
const SYMMETRY_TOL: f64 = 1e-12;
const ROW_SUM_TOL: f64 = 1e-12;

/// Symmetric, non-negative weight matrix of an undirected graph.
#[derive(Debug, Clone, PartialEq)]
pub struct SymAffinity(Mat);

impl SymAffinity {
    pub fn new(w: Mat) -> Result<SymAffinity> {
        let asym = w
            .asymmetry()
            .ok_or_else(|| Error::Shape(format!("affinity must be square, got {:?}", w.shape())))?;
        if asym > SYMMETRY_TOL * w.max_abs().max(1.0) {
            return Err(Error::InvalidInput(format!(
                "affinity is not symmetric (max |w_ij - w_ji| = {asym:e})"
            )));
        }
        if let Some(v) = w.as_slice().iter().find(|v| **v < 0.0) {
            return Err(Error::InvalidInput(format!("negative affinity {v}")));
        }
        Ok(SymAffinity(w))
    }

    pub fn matrix(&self) -> &Mat {
        &self.0
    }

    pub fn n(&self) -> usize {
        self.0.rows()
    }

    pub fn into_inner(self) -> Mat {
        self.0
    }
}

/// Row-stochastic transition matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct RandomWalk(Mat);

impl RandomWalk {
    pub fn new(p: Mat) -> Result<RandomWalk> {
        for (i, r) in p.row_iter().enumerate() {
            if r.iter().any(|v| *v < 0.0) {
                return Err(Error::InvalidInput(format!("negative probability in row {i}")));
            }
            let s: f64 = r.iter().sum();
            if (s - 1.0).abs() > ROW_SUM_TOL {
                return Err(Error::InvalidInput(format!("row {i} sums to {s}")));
            }
        }
        Ok(RandomWalk(p))
    }

    pub fn matrix(&self) -> &Mat {
        &self.0
    }
}

/// Degrees `D_ii = Σ_j W_ij`.
pub fn degrees(w: &Mat) -> Vec<f64> {
    w.row_iter().map(|r| r.iter().sum()).collect()
}

/// Unnormalised Laplacian `L = D - W`.
pub fn laplacian(w: &SymAffinity) -> Mat {
    let m = w.matrix();
    let deg = degrees(m);
    Mat::from_fn(m.rows(), m.cols(), |i, j| {
        if i == j {
            // Off-diagonal sum only, so the row sums to zero exactly.
            deg[i] - m[(i, i)]
        } else {
            -m[(i, j)]
        }
    })
}

/// `P = D⁻¹W`. Rows with zero degree become a self-transition.
pub fn random_walk_matrix(w: &Mat) -> Result<RandomWalk> {
    if let Some(v) = w.as_slice().iter().find(|v| **v < 0.0) {
        return Err(Error::InvalidInput(format!("negative weight {v}")));
    }
    let mut p = w.clone();
    for i in 0..p.rows() {
        let row = p.row_mut(i);
        let s: f64 = row.iter().sum();
        if s > 0.0 {
            row.iter_mut().for_each(|v| *v /= s);
        } else {
            assert!(i < row.len(), "zero-degree row {i} has no self column");
            row[i] = 1.0;
        }
    }
    Ok(RandomWalk(p))
}

/// Draws one column per row from that row's distribution.
pub fn sample_rows(p: &RandomWalk, seed: u64) -> Vec<usize> {
    let mut rng = seeded(seed);
    p.matrix()
        .row_iter()
        .map(|row| {
            let u: f64 = rng.random();
            let mut acc = 0.0;
            let mut last = 0;
            for (j, &pj) in row.iter().enumerate() {
                if pj > 0.0 {
                    acc += pj;
                    last = j;
                    if u < acc {
                        return j;
                    }
                }
            }
            // Rounding left the cumulative sum just below u.
            last
        })
        .collect()
}

/// Laplacian eigenmap of `w`.
///
/// Columns are Laplacian eigenvectors in ascending eigenvalue order. The
/// null space is re-based so that its first vector is the normalised
/// constant vector; that trivial column is dropped unless
/// `include_trivial`.
pub fn spectral_embed(w: &SymAffinity, dim: usize, include_trivial: bool) -> Result<Mat> {
    let n = w.n();
    if dim == 0 || dim >= n {
        return Err(Error::InvalidInput(format!(
            "embedding dimension {dim} must be in 1..{n}"
        )));
    }
    let eig = symmetric_eig(&laplacian(w))?;
    let top = eig.values.last().copied().unwrap_or(0.0).max(0.0);
    let null_dim = eig
        .values
        .iter()
        .take_while(|&&v| v <= NULL_EIGEN_REL_TOL * top)
        .count()
        .max(1);

    let mut vectors = eig.vectors;
    rebase_null_space(&mut vectors, null_dim);
    let start = usize::from(!include_trivial);
    Ok(vectors.select_cols(start..start + dim))
}

/// Replaces the first `null_dim` columns with an orthonormal basis of the
/// same span whose first member is the constant vector.
fn rebase_null_space(vectors: &mut Mat, null_dim: usize) {
    let n = vectors.rows();
    let mut basis: Vec<Vec<f64>> = vec![vec![1.0 / (n as f64).sqrt(); n]];
    for c in 0..null_dim {
        if basis.len() == null_dim {
            break;
        }
        let mut v = vectors.col(c);
        // Two passes of Gram-Schmidt.
        for _ in 0..2 {
            for b in &basis {
                let dot: f64 = b.iter().zip(&v).map(|(x, y)| x * y).sum();
                v.iter_mut().zip(b).for_each(|(vi, bi)| *vi -= dot * bi);
            }
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-6 {
            basis.push(v.into_iter().map(|x| x / norm).collect());
        }
    }
    for (c, b) in basis.iter().enumerate() {
        for (r, &x) in b.iter().enumerate() {
            vectors[(r, c)] = x;
        }
        fix_sign(vectors, c);
    }
}

/// SpectralNet objective `(1/n²) Σ_ij W_ij ‖y_i - y_j‖²`.
pub fn spectralnet_loss(w: &Mat, y: &Mat) -> Result<f64> {
    let n = y.rows();
    if w.shape() != (n, n) {
        return Err(Error::Shape(format!(
            "affinity {:?} does not match {} embedding rows",
            w.shape(),
            n
        )));
    }
    if let Some(v) = w.as_slice().iter().find(|v| **v < 0.0) {
        return Err(Error::InvalidInput(format!("negative weight {v}")));
    }
    let mut total = 0.0;
    for i in 0..n {
        for j in 0..n {
            let wij = w[(i, j)];
            if wij != 0.0 {
                let d2: f64 = y.row(i).iter().zip(y.row(j)).map(|(a, b)| (a - b) * (a - b)).sum();
                total += wij * d2;
            }
        }
    }
    Ok(total / (n * n) as f64)
}

/// Frobenius norm of `(1/n) YᵀY - I`.
pub fn orthogonality_residual(y: &Mat) -> f64 {
    let n = y.rows() as f64;
    let gram = y.t_matmul(y).expect("shapes agree");
    let k = gram.rows();
    let mut s = 0.0;
    for i in 0..k {
        for j in 0..k {
            let target = if i == j { 1.0 } else { 0.0 };
            let d = gram[(i, j)] / n - target;
            s += d * d;
        }
    }
    s.sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sym(rows: &[&[f64]]) -> SymAffinity {
        SymAffinity::new(Mat::from_rows(rows).unwrap()).unwrap()
    }

    #[test]
    fn laplacian_examples() {
        let l = laplacian(&sym(&[&[0.0, 1.0], &[1.0, 0.0]]));
        assert_eq!(l, Mat::from_rows(&[[1.0, -1.0], [-1.0, 1.0]]).unwrap());
        let z = laplacian(&SymAffinity::new(Mat::zeros(3, 3)).unwrap());
        assert_eq!(z, Mat::zeros(3, 3));
    }

    #[test]
    fn affinity_validation() {
        assert!(SymAffinity::new(Mat::from_rows(&[[0.0, 1.0], [0.5, 0.0]]).unwrap()).is_err());
        assert!(SymAffinity::new(Mat::from_rows(&[[0.0, -1.0], [-1.0, 0.0]]).unwrap()).is_err());
        assert!(SymAffinity::new(Mat::zeros(2, 3)).is_err());
    }

    #[test]
    fn random_walk_examples() {
        let p = random_walk_matrix(&Mat::from_rows(&[[0.0, 1.0], [1.0, 0.0]]).unwrap()).unwrap();
        assert_eq!(p.matrix().as_slice(), &[0.0, 1.0, 1.0, 0.0]);
        let p = random_walk_matrix(&Mat::from_rows(&[[2.0, 2.0]]).unwrap()).unwrap();
        assert_eq!(p.matrix().as_slice(), &[0.5, 0.5]);
        let p =
            random_walk_matrix(&Mat::from_rows(&[[0.0, 3.0, 0.0], [0.0, 0.0, 0.0], [1.0, 0.0, 1.0]]).unwrap()).unwrap();
        assert_eq!(p.matrix().row(1), &[0.0, 1.0, 0.0]);
        assert!(random_walk_matrix(&Mat::from_rows(&[[1.0, -1.0]]).unwrap()).is_err());
    }

    #[test]
    fn sampling() {
        let p = RandomWalk::new(Mat::from_rows(&[[1.0, 0.0], [0.0, 1.0]]).unwrap()).unwrap();
        for seed in 0..20 {
            assert_eq!(sample_rows(&p, seed), vec![0, 1]);
        }
        let n = 100_000;
        let half = RandomWalk::new(Mat::from_fn(n, 2, |_, _| 0.5)).unwrap();
        let draws = sample_rows(&half, 11);
        let freq = draws.iter().filter(|&&j| j == 0).count() as f64 / n as f64;
        assert!((freq - 0.5).abs() < 0.02, "frequency {freq}");
        assert_eq!(draws, sample_rows(&half, 11));
    }

    #[test]
    fn path_graph_spectrum() {
        // Path 0-1-2: L = [[1,-1,0],[-1,2,-1],[0,-1,1]] has spectrum {0, 1, 3}.
        let w = sym(&[&[0.0, 1.0, 0.0], &[1.0, 0.0, 1.0], &[0.0, 1.0, 0.0]]);
        let e = symmetric_eig(&laplacian(&w)).unwrap();
        for (got, want) in e.values.iter().zip([0.0, 1.0, 3.0]) {
            assert!((got - want).abs() < 1e-12, "{:?}", e.values);
        }
    }

    #[test]
    fn embedding_of_two_cliques_separates_by_sign() {
        let comp = |i: usize| usize::from(i >= 3);
        let w = SymAffinity::new(Mat::from_fn(
            7,
            7,
            |i, j| {
                if i != j && comp(i) == comp(j) {
                    1.0
                } else {
                    0.0
                }
            },
        ))
        .unwrap();
        let y = spectral_embed(&w, 1, false).unwrap();
        let first = y[(0, 0)].signum();
        for i in 0..7 {
            let expect = if comp(i) == 0 { first } else { -first };
            assert_eq!(y[(i, 0)].signum(), expect);
            assert!(y[(i, 0)].abs() > 1e-3);
        }
    }

    #[test]
    fn trivial_column_is_constant() {
        let w = sym(&[&[0.0, 1.0, 0.0], &[1.0, 0.0, 1.0], &[0.0, 1.0, 0.0]]);
        let y = spectral_embed(&w, 1, true).unwrap();
        let c = 1.0 / 3f64.sqrt();
        for i in 0..3 {
            assert!((y[(i, 0)] - c).abs() < 1e-12);
        }
        assert!(spectral_embed(&w, 3, false).is_err());
        assert!(spectral_embed(&w, 0, false).is_err());
    }

    #[test]
    fn spectralnet_examples() {
        let w = Mat::from_rows(&[[0.0, 1.0], [1.0, 0.0]]).unwrap();
        let y = Mat::column(&[0.0, 1.0]).unwrap();
        assert_eq!(spectralnet_loss(&w, &y).unwrap(), 0.5);
        let flat = Mat::column(&[3.0, 3.0]).unwrap();
        assert_eq!(spectralnet_loss(&w, &flat).unwrap(), 0.0);
        assert!(spectralnet_loss(&w, &Mat::column(&[1.0, 2.0, 3.0]).unwrap()).is_err());
    }

    #[test]
    fn orthogonality_examples() {
        assert_eq!(orthogonality_residual(&Mat::column(&[1.0, -1.0]).unwrap()), 0.0);
        assert!((orthogonality_residual(&Mat::zeros(4, 3)) - 3f64.sqrt()).abs() < 1e-15);
    }
}
