//! Thomas algorithm for the M-matrix systems produced by the radial and
//! axial operators.
//!
//! Both operators are assembled once per species and reused for every
//! marching step, so the forward elimination is stored and only the
//! right-hand side is swept on each solve.

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Tridiagonal matrix `A` with `A[i][i-1] = lower[i]`, `A[i][i] = diag[i]`,
/// `A[i][i+1] = upper[i]`. `lower[0]` and `upper[n-1]` are ignored.
#[derive(Debug, Clone, PartialEq)]
pub struct Tridiagonal<T> {
    pub lower: Vec<T>,
    pub diag: Vec<T>,
    pub upper: Vec<T>,
}

impl<T: Real> Tridiagonal<T> {
    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    /// `y = A x`
    pub fn apply(&self, x: &[T], y: &mut [T]) {
        let n = self.len();
        for i in 0..n {
            let mut acc = self.diag[i] * x[i];
            if i > 0 {
                acc += self.lower[i] * x[i - 1];
            }
            if i + 1 < n {
                acc += self.upper[i] * x[i + 1];
            }
            y[i] = acc;
        }
    }

    /// True when off-diagonals are nonpositive and every row is weakly
    /// diagonally dominant.
    pub fn is_m_matrix(&self) -> bool {
        let n = self.len();
        (0..n).all(|i| {
            let lo = if i > 0 { self.lower[i] } else { T::zero() };
            let up = if i + 1 < n { self.upper[i] } else { T::zero() };
            lo <= T::zero() && up <= T::zero() && self.diag[i] >= lo.abs() + up.abs()
        })
    }

    /// Forward elimination. Fails if a pivot is not strictly positive, which
    /// cannot happen for a nonsingular M-matrix.
    pub fn factor(&self) -> Result<FactoredTridiagonal<T>> {
        let n = self.len();
        assert!(n > 0, "empty tridiagonal system");
        assert_eq!(self.lower.len(), n);
        assert_eq!(self.upper.len(), n);

        let mut inv_pivot = vec![T::zero(); n];
        let mut c_prime = vec![T::zero(); n];
        let mut pivot = self.diag[0];
        for i in 0..n {
            if i > 0 {
                pivot = self.diag[i] - self.lower[i] * c_prime[i - 1];
            }
            if !(pivot > T::zero()) {
                return Err(Error::Pivot {
                    row: i,
                    pivot: pivot.as_f64(),
                });
            }
            inv_pivot[i] = T::one() / pivot;
            if i + 1 < n {
                c_prime[i] = self.upper[i] * inv_pivot[i];
            }
        }
        Ok(FactoredTridiagonal {
            lower: self.lower.clone(),
            c_prime,
            inv_pivot,
        })
    }
}

#[derive(Debug, Clone)]
pub struct FactoredTridiagonal<T> {
    lower: Vec<T>,
    c_prime: Vec<T>,
    inv_pivot: Vec<T>,
}

impl<T: Real> FactoredTridiagonal<T> {
    pub fn len(&self) -> usize {
        self.inv_pivot.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inv_pivot.is_empty()
    }

    /// Overwrites `rhs` with the solution.
    pub fn solve_in_place(&self, rhs: &mut [T]) {
        let n = self.len();
        assert_eq!(rhs.len(), n, "right-hand side length");
        rhs[0] *= self.inv_pivot[0];
        for i in 1..n {
            rhs[i] = (rhs[i] - self.lower[i] * rhs[i - 1]) * self.inv_pivot[i];
        }
        for i in (0..n - 1).rev() {
            let next = rhs[i + 1];
            rhs[i] -= self.c_prime[i] * next;
        }
    }
}
