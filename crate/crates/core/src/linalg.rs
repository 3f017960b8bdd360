//! Small dense linear algebra: LU with partial pivoting and least squares.
//!
//! Algebra dimensions in this crate are tiny (2..~12), so a direct
//! factorization is all that is needed.

use crate::scalar::Scalar;

/// LU factorization of a square matrix, kept together with its permutation
/// sign so the determinant falls out for free.
pub(crate) struct Lu<T> {
    n: usize,
    lu: Vec<T>,
    perm: Vec<usize>,
    det: T,
}

impl<T: Scalar> Lu<T> {
    /// Factorizes a row-major `n x n` matrix. Never fails: a singular matrix
    /// is reported through `det()` being (near) zero and `solve` returning
    /// `None`.
    pub(crate) fn new(a: &[T], n: usize) -> Self {
        debug_assert_eq!(a.len(), n * n);
        let mut lu = a.to_vec();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut det = T::one();
        for col in 0..n {
            // Pivot on the largest magnitude in this column.
            let mut pivot = col;
            let mut best = lu[col * n + col].abs();
            for row in col + 1..n {
                let v = lu[row * n + col].abs();
                if v > best {
                    best = v;
                    pivot = row;
                }
            }
            if pivot != col {
                for k in 0..n {
                    lu.swap(col * n + k, pivot * n + k);
                }
                perm.swap(col, pivot);
                det = -det;
            }
            let diag = lu[col * n + col];
            det = det * diag;
            if diag == T::zero() {
                continue;
            }
            for row in col + 1..n {
                let factor = lu[row * n + col] / diag;
                lu[row * n + col] = factor;
                for k in col + 1..n {
                    let sub = factor * lu[col * n + k];
                    lu[row * n + k] = lu[row * n + k] - sub;
                }
            }
        }
        Lu { n, lu, perm, det }
    }

    pub(crate) fn det(&self) -> T {
        self.det
    }

    /// Solves `A x = b`; `None` when a pivot vanished exactly.
    pub(crate) fn solve(&self, b: &[T]) -> Option<Vec<T>> {
        let n = self.n;
        debug_assert_eq!(b.len(), n);
        let mut x: Vec<T> = (0..n).map(|i| b[self.perm[i]]).collect();
        // Forward substitution (unit lower-triangular factor).
        for i in 0..n {
            for j in 0..i {
                let sub = self.lu[i * n + j] * x[j];
                x[i] = x[i] - sub;
            }
        }
        // Back substitution.
        for i in (0..n).rev() {
            for j in i + 1..n {
                let sub = self.lu[i * n + j] * x[j];
                x[i] = x[i] - sub;
            }
            let diag = self.lu[i * n + i];
            if diag == T::zero() {
                return None;
            }
            x[i] = x[i] / diag;
        }
        Some(x)
    }
}

/// Least-squares solution of an overdetermined system `A x = b` via the
/// normal equations; returns the solution and the residual max-norm.
pub(crate) fn least_squares<T: Scalar>(
    a: &[T],
    b: &[T],
    rows: usize,
    cols: usize,
) -> Option<(Vec<T>, T)> {
    debug_assert_eq!(a.len(), rows * cols);
    debug_assert_eq!(b.len(), rows);
    let mut ata = vec![T::zero(); cols * cols];
    let mut atb = vec![T::zero(); cols];
    for r in 0..rows {
        for i in 0..cols {
            let ari = a[r * cols + i];
            atb[i] = atb[i] + ari * b[r];
            for j in 0..cols {
                ata[i * cols + j] = ata[i * cols + j] + ari * a[r * cols + j];
            }
        }
    }
    let x = Lu::new(&ata, cols).solve(&atb)?;
    let mut resid = T::zero();
    for r in 0..rows {
        let mut acc = -b[r];
        for j in 0..cols {
            acc = acc + a[r * cols + j] * x[j];
        }
        resid = resid.max(acc.abs());
    }
    Some((x, resid))
}
