//! Thomas algorithm for tridiagonal systems.

use crate::error::{domain, Error, Result};
use crate::scalar::Real;

/// Solves `A x = rhs` for tridiagonal `A`: `lower[i] = A[i][i-1]` (`lower[0]`
/// ignored), `diag[i] = A[i][i]`, `upper[i] = A[i][i+1]` (last entry ignored).
pub fn thomas_solve<T: Real>(lower: &[T], diag: &[T], upper: &[T], rhs: &[T]) -> Result<Vec<T>> {
    let lu = TridiagonalLu::factor(lower, diag, upper)?;
    if rhs.len() != diag.len() {
        return Err(Error::DimensionMismatch {
            expected: diag.len(),
            got: rhs.len(),
        });
    }
    let mut x = rhs.to_vec();
    lu.solve_in_place(&mut x);
    Ok(x)
}

/// Forward-elimination factors of a tridiagonal matrix, reusable across
/// right-hand sides.
#[derive(Debug, Clone)]
pub struct TridiagonalLu<T> {
    lower: Vec<T>,
    inv_pivot: Vec<T>,
    upper_scaled: Vec<T>,
}

impl<T: Real> TridiagonalLu<T> {
    pub fn factor(lower: &[T], diag: &[T], upper: &[T]) -> Result<Self> {
        let n = diag.len();
        if n == 0 {
            return domain("empty tridiagonal system");
        }
        for len in [lower.len(), upper.len()] {
            if len != n {
                return Err(Error::DimensionMismatch { expected: n, got: len });
            }
        }
        let mut inv_pivot = vec![T::zero(); n];
        let mut upper_scaled = vec![T::zero(); n];
        let mut prev = T::zero();
        for i in 0..n {
            let sub = if i > 0 { lower[i] } else { T::zero() };
            let sup = if i + 1 < n { upper[i] } else { T::zero() };
            let pivot = diag[i] - sub * prev;
            let scale = diag[i].abs() + sub.abs() + sup.abs();
            if !pivot.is_finite() || pivot.abs() <= T::epsilon() * scale || pivot == T::zero() {
                return Err(Error::SingularMatrix { row: i });
            }
            inv_pivot[i] = pivot.recip();
            upper_scaled[i] = sup * inv_pivot[i];
            prev = upper_scaled[i];
        }
        let mut lower = lower.to_vec();
        lower[0] = T::zero();
        Ok(Self {
            lower,
            inv_pivot,
            upper_scaled,
        })
    }

    pub fn len(&self) -> usize {
        self.inv_pivot.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inv_pivot.is_empty()
    }

    /// Overwrites `x` (holding the right-hand side) with the solution.
    pub fn solve_in_place(&self, x: &mut [T]) {
        let n = self.len();
        x[0] = x[0] * self.inv_pivot[0];
        for i in 1..n {
            x[i] = (x[i] - self.lower[i] * x[i - 1]) * self.inv_pivot[i];
        }
        for i in (0..n - 1).rev() {
            x[i] = x[i] - self.upper_scaled[i] * x[i + 1];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Dense Gaussian elimination with partial pivoting.
    fn dense_solve(a: &[Vec<f64>], b: &[f64]) -> Vec<f64> {
        let n = b.len();
        let mut m: Vec<Vec<f64>> = a.to_vec();
        let mut x = b.to_vec();
        for c in 0..n {
            let p = (c..n).max_by(|&i, &j| m[i][c].abs().total_cmp(&m[j][c].abs())).unwrap();
            m.swap(c, p);
            x.swap(c, p);
            for r in c + 1..n {
                let f = m[r][c] / m[c][c];
                for k in c..n {
                    m[r][k] -= f * m[c][k];
                }
                x[r] -= f * x[c];
            }
        }
        for i in (0..n).rev() {
            let s: f64 = (i + 1..n).map(|k| m[i][k] * x[k]).sum();
            x[i] = (x[i] - s) / m[i][i];
        }
        x
    }

    #[test]
    fn identity() {
        let rhs = [1.0, -2.0, 3.5, 4.0];
        let x = thomas_solve(&[0.0; 4], &[1.0; 4], &[0.0; 4], &rhs).unwrap();
        assert_eq!(x, rhs);
    }

    #[test]
    fn matches_dense_solver() {
        let lower = [0.0, -0.7, 0.3, -1.1, 0.2];
        let diag = [4.0, 3.5, -5.0, 4.2, 3.0];
        let upper = [1.2, -0.9, 2.1, 0.4, 0.0];
        let rhs = [1.0, 2.0, -3.0, 0.5, 7.0];
        let mut dense = vec![vec![0.0; 5]; 5];
        for i in 0..5 {
            dense[i][i] = diag[i];
            if i > 0 {
                dense[i][i - 1] = lower[i];
            }
            if i < 4 {
                dense[i][i + 1] = upper[i];
            }
        }
        let want = dense_solve(&dense, &rhs);
        let got = thomas_solve(&lower, &diag, &upper, &rhs).unwrap();
        for (g, w) in got.iter().zip(&want) {
            assert!((g - w).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_pivot() {
        let err = thomas_solve(&[0.0, 1.0], &[0.0, 1.0], &[1.0, 0.0], &[1.0, 1.0]).unwrap_err();
        assert_eq!(err, Error::SingularMatrix { row: 0 });
        // second pivot cancels: 1 - 1*1 = 0
        let err = thomas_solve(&[0.0, 1.0], &[1.0, 1.0], &[1.0, 0.0], &[1.0, 1.0]).unwrap_err();
        assert_eq!(err, Error::SingularMatrix { row: 1 });
    }
}
