//! Cyclic Jacobi eigen-decomposition for small dense symmetric matrices.

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Off-diagonal Frobenius norm, relative to the full norm, at which the
/// sweep loop stops.
pub const OFF_DIAGONAL_TOLERANCE: f64 = 1e-12;
pub const MAX_SWEEPS: usize = 100;
/// Allowed asymmetry, relative to the largest entry (or absolute below 1).
pub const SYMMETRY_TOLERANCE: f64 = 1e-9;

/// Eigenvalues and eigenvectors of a symmetric matrix.
#[derive(Clone, Debug)]
pub struct SymmetricEigen<T, const N: usize> {
    /// Unsorted eigenvalues.
    pub values: [T; N],
    /// Column `j` is the unit eigenvector for `values[j]`.
    pub vectors: [[T; N]; N],
}

impl<T: Real, const N: usize> SymmetricEigen<T, N> {
    pub fn vector(&self, j: usize) -> [T; N] {
        std::array::from_fn(|i| self.vectors[i][j])
    }

    /// Index of the algebraically largest eigenvalue; the first one on ties.
    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for j in 1..N {
            if self.values[j] > self.values[best] {
                best = j;
            }
        }
        best
    }
}

fn check_symmetric<T: Real, const N: usize>(m: &[[T; N]; N]) -> Result<()> {
    let mut scale = T::one();
    for row in m {
        for &v in row {
            if !v.is_finite() {
                return Err(Error::invalid("matrix has non-finite entries"));
            }
            scale = scale.max(v.abs());
        }
    }
    let tol = T::lit(SYMMETRY_TOLERANCE) * scale;
    for i in 0..N {
        for j in (i + 1)..N {
            if (m[i][j] - m[j][i]).abs() > tol {
                return Err(Error::invalid(format!(
                    "matrix is not symmetric at ({i}, {j}): {} vs {}",
                    m[i][j], m[j][i]
                )));
            }
        }
    }
    Ok(())
}

/// Diagonalizes a symmetric matrix with cyclic Jacobi rotations.
pub fn symmetric_eigen<T: Real, const N: usize>(m: &[[T; N]; N]) -> Result<SymmetricEigen<T, N>> {
    check_symmetric(m)?;

    let half = T::lit(0.5);
    let mut a = *m;
    for i in 0..N {
        for j in (i + 1)..N {
            let s = (a[i][j] + a[j][i]) * half;
            a[i][j] = s;
            a[j][i] = s;
        }
    }
    let mut v = [[T::zero(); N]; N];
    for (i, row) in v.iter_mut().enumerate() {
        row[i] = T::one();
    }

    let tol = T::lit(OFF_DIAGONAL_TOLERANCE).max(T::epsilon());
    let mut converged = false;
    for _ in 0..MAX_SWEEPS {
        let mut off = T::zero();
        let mut total = T::zero();
        for i in 0..N {
            for j in 0..N {
                let sq = a[i][j] * a[i][j];
                total = total + sq;
                if i != j {
                    off = off + sq;
                }
            }
        }
        if off == T::zero() || off.sqrt() <= tol * total.sqrt() {
            converged = true;
            break;
        }

        for p in 0..N {
            for q in (p + 1)..N {
                let apq = a[p][q];
                if apq == T::zero() {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (T::lit(2.0) * apq);
                let t = if theta.abs() > T::lit(1e150).min(T::max_value().sqrt()) {
                    T::one() / (T::lit(2.0) * theta)
                } else {
                    let t = T::one() / (theta.abs() + (theta * theta + T::one()).sqrt());
                    if theta < T::zero() {
                        -t
                    } else {
                        t
                    }
                };
                let c = T::one() / (t * t + T::one()).sqrt();
                let s = t * c;

                for row in a.iter_mut() {
                    let (akp, akq) = (row[p], row[q]);
                    row[p] = c * akp - s * akq;
                    row[q] = s * akp + c * akq;
                }
                for k in 0..N {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                a[p][q] = T::zero();
                a[q][p] = T::zero();
                for row in v.iter_mut() {
                    let (vkp, vkq) = (row[p], row[q]);
                    row[p] = c * vkp - s * vkq;
                    row[q] = s * vkp + c * vkq;
                }
            }
        }
    }
    if !converged {
        return Err(Error::Numerical(format!(
            "Jacobi iteration did not converge in {MAX_SWEEPS} sweeps"
        )));
    }

    Ok(SymmetricEigen {
        values: std::array::from_fn(|i| a[i][i]),
        vectors: v,
    })
}

/// Largest eigenvalue and a unit eigenvector for it.
pub fn max_eigenvector<T: Real, const N: usize>(m: &[[T; N]; N]) -> Result<(T, [T; N])> {
    let eig = symmetric_eigen(m)?;
    let j = eig.argmax();
    let mut vec = eig.vector(j);
    let norm = vec.iter().map(|&x| x * x).sum::<T>().sqrt();
    if !(norm > T::zero()) {
        return Err(Error::Numerical("degenerate eigenvector".into()));
    }
    for x in vec.iter_mut() {
        *x = *x / norm;
    }
    Ok((eig.values[j], vec))
}
