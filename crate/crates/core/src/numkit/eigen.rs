use super::Mat;
use crate::error::{Error, Result};

/// Off-diagonal Frobenius norm (relative to the full norm) at which the
/// Jacobi iteration stops.
pub const JACOBI_TOL: f64 = 1e-12;
pub const JACOBI_MAX_SWEEPS: usize = 100;
/// Accepted asymmetry `|a_ij - a_ji|`, relative to `max(1, max|a|)`.
pub const SYMMETRY_TOL: f64 = 1e-12;

/// Eigenvalues in ascending order with matching unit eigenvectors stored as
/// the columns of `vectors`.
#[derive(Debug, Clone)]
pub struct EigDecomp {
    pub values: Vec<f64>,
    pub vectors: Mat,
}

impl EigDecomp {
    pub fn vector(&self, j: usize) -> Vec<f64> {
        self.vectors.col(j)
    }
}

/// Full eigendecomposition of a real symmetric matrix by cyclic Jacobi
/// rotations.
///
/// Eigenvalues come back ascending. Each eigenvector is flipped so that its
/// largest-magnitude component is positive (the first such component when
/// several tie).
pub fn symmetric_eig(a: &Mat) -> Result<EigDecomp> {
    let n = a.rows();
    let asym = a
        .asymmetry()
        .ok_or_else(|| Error::Shape(format!("eigendecomposition of a {}x{} matrix", n, a.cols())))?;
    if asym > SYMMETRY_TOL * a.max_abs().max(1.0) {
        return Err(Error::InvalidInput(format!(
            "matrix is not symmetric (max |a_ij - a_ji| = {asym:e})"
        )));
    }

    // Work on the exactly symmetrised copy.
    let mut m = Mat::from_fn(n, n, |i, j| 0.5 * (a[(i, j)] + a[(j, i)]));
    let mut v = Mat::identity(n);
    let total = m.frobenius_norm();

    let off_norm = |m: &Mat| {
        let mut s = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                s += 2.0 * m[(i, j)] * m[(i, j)];
            }
        }
        s.sqrt()
    };

    let mut converged = total == 0.0 || n == 1;
    let mut sweeps = 0;
    while !converged {
        if off_norm(&m) <= JACOBI_TOL * total {
            converged = true;
            break;
        }
        if sweeps == JACOBI_MAX_SWEEPS {
            return Err(Error::NoConvergence {
                sweeps,
                off_norm: off_norm(&m),
            });
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let theta = (m[(q, q)] - m[(p, p)]) / (2.0 * apq);
                let t = if theta >= 0.0 {
                    1.0 / (theta + (theta * theta + 1.0).sqrt())
                } else {
                    -1.0 / (-theta + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                rotate(&mut m, &mut v, p, q, c, s);
            }
        }
        sweeps += 1;
    }
    debug_assert!(converged);

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[(i, i)].total_cmp(&m[(j, j)]));
    let values: Vec<f64> = order.iter().map(|&i| m[(i, i)]).collect();
    let mut vectors = Mat::from_fn(n, n, |r, c| v[(r, order[c])]);
    for c in 0..n {
        fix_sign(&mut vectors, c);
    }
    Ok(EigDecomp { values, vectors })
}

/// Applies `Jᵀ M J` and `V J` for the Givens rotation in the `(p, q)` plane.
fn rotate(m: &mut Mat, v: &mut Mat, p: usize, q: usize, c: f64, s: f64) {
    let n = m.rows();
    for k in 0..n {
        let mkp = m[(k, p)];
        let mkq = m[(k, q)];
        m[(k, p)] = c * mkp - s * mkq;
        m[(k, q)] = s * mkp + c * mkq;
    }
    for k in 0..n {
        let mpk = m[(p, k)];
        let mqk = m[(q, k)];
        m[(p, k)] = c * mpk - s * mqk;
        m[(q, k)] = s * mpk + c * mqk;
    }
    m[(p, q)] = 0.0;
    m[(q, p)] = 0.0;
    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = c * vkp - s * vkq;
        v[(k, q)] = s * vkp + c * vkq;
    }
}

/// Makes the largest-magnitude entry of column `c` positive.
pub(crate) fn fix_sign(vectors: &mut Mat, c: usize) {
    let n = vectors.rows();
    let biggest = (0..n).fold(0.0_f64, |b, r| b.max(vectors[(r, c)].abs()));
    if biggest == 0.0 {
        return;
    }
    // Components equal up to rounding count as tied; the first one wins.
    let lead = (0..n)
        .find(|&r| vectors[(r, c)].abs() >= biggest * (1.0 - 1e-9))
        .unwrap_or(0);
    if vectors[(lead, c)] < 0.0 {
        for r in 0..n {
            vectors[(r, c)] = -vectors[(r, c)];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_and_diagonal() {
        let e = symmetric_eig(&Mat::identity(2)).unwrap();
        assert_eq!(e.values, vec![1.0, 1.0]);

        let d = Mat::from_rows(&[[5.0, 0.0], [0.0, 2.0]]).unwrap();
        let e = symmetric_eig(&d).unwrap();
        assert_eq!(e.values, vec![2.0, 5.0]);
        assert_eq!(e.vector(0), vec![0.0, 1.0]);
        assert_eq!(e.vector(1), vec![1.0, 0.0]);
    }

    #[test]
    fn swap_matrix() {
        // Characteristic polynomial λ² - 1: eigenpairs (-1, (1,-1)/√2), (1, (1,1)/√2).
        let a = Mat::from_rows(&[[0.0, 1.0], [1.0, 0.0]]).unwrap();
        let e = symmetric_eig(&a).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!((e.values[0] + 1.0).abs() < 1e-14);
        assert!((e.values[1] - 1.0).abs() < 1e-14);
        let v0 = e.vector(0);
        let v1 = e.vector(1);
        assert!((v0[0] - h).abs() < 1e-14 && (v0[1] + h).abs() < 1e-14, "{v0:?}");
        assert!((v1[0] - h).abs() < 1e-14 && (v1[1] - h).abs() < 1e-14, "{v1:?}");
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(symmetric_eig(&Mat::zeros(2, 3)), Err(Error::Shape(_))));
        let a = Mat::from_rows(&[[0.0, 1.0], [0.5, 0.0]]).unwrap();
        assert!(matches!(symmetric_eig(&a), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn zero_matrix() {
        let e = symmetric_eig(&Mat::zeros(3, 3)).unwrap();
        assert_eq!(e.values, vec![0.0; 3]);
        assert_eq!(e.vectors, Mat::identity(3));
    }
}
