//! Small dense linear algebra.
//!
//! [`Mat`] is generic over [`Real`] so that inverses, projectors and frames
//! can be built inside jet arithmetic and differentiated. Plain `f64` work
//! goes through nalgebra.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::jetcalc::Real;

/// Condition number above which a metric is treated as singular.
pub const MAX_CONDITION: f64 = 1e12;

/// Row-major matrix over any [`Real`].
#[derive(Clone, Debug)]
pub struct Mat<T> {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<T>,
}

impl<T: Real> Mat<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |i, j| if i == j { T::one() } else { T::zero() })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_row_major(rows: usize, cols: usize, data: Vec<T>) -> Self {
        assert_eq!(data.len(), rows * cols);
        Self { rows, cols, data }
    }

    pub fn column(v: &[T]) -> Self {
        Self::from_row_major(v.len(), 1, v.to_vec())
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> T {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: T) {
        self.data[i * self.cols + j] = v;
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.at(j, i))
    }

    pub fn matmul(&self, rhs: &Mat<T>) -> Mat<T> {
        assert_eq!(self.cols, rhs.rows);
        Self::from_fn(self.rows, rhs.cols, |i, j| {
            let mut s = T::zero();
            for k in 0..self.cols {
                s += self.at(i, k) * rhs.at(k, j);
            }
            s
        })
    }

    pub fn mul_vec(&self, v: &[T]) -> Vec<T> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| {
                let mut s = T::zero();
                for (k, vk) in v.iter().enumerate() {
                    s += self.at(i, k) * *vk;
                }
                s
            })
            .collect()
    }

    pub fn sub(&self, rhs: &Mat<T>) -> Mat<T> {
        Self::from_fn(self.rows, self.cols, |i, j| self.at(i, j) - rhs.at(i, j))
    }

    pub fn col(&self, j: usize) -> Vec<T> {
        (0..self.rows).map(|i| self.at(i, j)).collect()
    }

    /// Solve `self · X = rhs` by Gaussian elimination with partial pivoting
    /// on the leading real parts. `None` when a pivot vanishes.
    pub fn solve(&self, rhs: &Mat<T>) -> Option<Mat<T>> {
        assert_eq!(self.rows, self.cols);
        assert_eq!(self.rows, rhs.rows);
        let n = self.rows;
        let mut a = self.clone();
        let mut b = rhs.clone();
        for k in 0..n {
            let piv = (k..n).max_by(|&r, &s| {
                a.at(r, k)
                    .value()
                    .abs()
                    .total_cmp(&a.at(s, k).value().abs())
            })?;
            if a.at(piv, k).value() == 0.0 {
                return None;
            }
            if piv != k {
                for j in 0..n {
                    a.data.swap(k * n + j, piv * n + j);
                }
                for j in 0..b.cols {
                    b.data.swap(k * b.cols + j, piv * b.cols + j);
                }
            }
            let inv = a.at(k, k).recip();
            for r in (k + 1)..n {
                let f = a.at(r, k) * inv;
                for j in k..n {
                    let v = a.at(r, j) - f * a.at(k, j);
                    a.set(r, j, v);
                }
                for j in 0..b.cols {
                    let v = b.at(r, j) - f * b.at(k, j);
                    b.set(r, j, v);
                }
            }
        }
        for k in (0..n).rev() {
            let inv = a.at(k, k).recip();
            for j in 0..b.cols {
                let mut s = b.at(k, j);
                for c in (k + 1)..n {
                    s -= a.at(k, c) * b.at(c, j);
                }
                b.set(k, j, s * inv);
            }
        }
        Some(b)
    }

    pub fn inverse(&self) -> Option<Mat<T>> {
        self.solve(&Mat::identity(self.rows))
    }

    pub fn values(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.rows, self.cols, |i, j| self.at(i, j).value())
    }
}

/// `aᵀ g b`.
pub fn inner<T: Real>(g: &Mat<T>, a: &[T], b: &[T]) -> T {
    let gb = g.mul_vec(b);
    let mut s = T::zero();
    for (x, y) in a.iter().zip(&gb) {
        s += *x * *y;
    }
    s
}

/// Symmetric eigenvalues, ascending.
pub fn sym_eigenvalues(m: &DMatrix<f64>) -> Vec<f64> {
    let mut ev: Vec<f64> = SymmetricEigen::new(m.clone())
        .eigenvalues
        .iter()
        .copied()
        .collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// Ratio of extreme absolute eigenvalues of a symmetric matrix.
pub fn sym_condition(m: &DMatrix<f64>) -> f64 {
    let ev = sym_eigenvalues(m);
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for e in ev {
        lo = lo.min(e.abs());
        hi = hi.max(e.abs());
    }
    if lo == 0.0 {
        f64::INFINITY
    } else {
        hi / lo
    }
}

/// Inverse of a metric matrix, refusing ill-conditioned input.
pub fn metric_inverse(g: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let condition = sym_condition(g);
    if !(condition <= MAX_CONDITION) {
        return Err(Error::SingularMetric { condition });
    }
    g.clone()
        .try_inverse()
        .ok_or(Error::SingularMetric { condition })
}

pub fn g_inner(g: &DMatrix<f64>, a: &DVector<f64>, b: &DVector<f64>) -> f64 {
    a.dot(&(g * b))
}

pub fn g_norm(g: &DMatrix<f64>, a: &DVector<f64>) -> f64 {
    g_inner(g, a, a).max(0.0).sqrt()
}

/// Modified Gram–Schmidt with respect to `g`. Candidates whose residual falls
/// below `rel_tol` times their original norm are skipped; at most `limit`
/// vectors are returned.
pub fn gram_schmidt(
    g: &DMatrix<f64>,
    candidates: &[DVector<f64>],
    rel_tol: f64,
    limit: usize,
) -> Vec<DVector<f64>> {
    let mut out: Vec<DVector<f64>> = Vec::new();
    for c in candidates {
        if out.len() == limit {
            break;
        }
        let n0 = g_norm(g, c);
        if n0 == 0.0 {
            continue;
        }
        let mut v = c.clone();
        for e in &out {
            let k = g_inner(g, e, &v);
            v -= e * k;
        }
        let n = g_norm(g, &v);
        if n > rel_tol * n0 {
            out.push(v / n);
        }
    }
    out
}

/// g-orthogonal projector onto the column span of `t` (`m × k`, full rank).
pub fn tangent_projector(g: &DMatrix<f64>, t: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    let gram = t.transpose() * g * t;
    let inv = gram.try_inverse()?;
    Some(t * inv * t.transpose() * g)
}

pub fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0, |acc, v| acc.max(v.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jetcalc::Jet1;

    #[test]
    fn solve_matches_nalgebra() {
        let a = Mat::from_row_major(3, 3, vec![0.0, 2.0, 1.0, 1.0, 1.0, 0.0, 3.0, 0.5, 4.0]);
        let inv = a.inverse().unwrap();
        let na = DMatrix::from_row_slice(3, 3, &[0.0, 2.0, 1.0, 1.0, 1.0, 0.0, 3.0, 0.5, 4.0])
            .try_inverse()
            .unwrap();
        assert!((inv.values() - na).amax() < 1e-14);
    }

    #[test]
    fn inverse_derivative_is_minus_ainv_da_ainv() {
        // A(t) = [[2+t, 1], [1, 3]]
        let t = Jet1::variable(0.0, 0, 1);
        let a = Mat::from_row_major(
            2,
            2,
            vec![t + 2.0, Jet1::cst(1.0), Jet1::cst(1.0), Jet1::cst(3.0)],
        );
        let inv = a.inverse().unwrap();
        let ainv = DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 3.0])
            .try_inverse()
            .unwrap();
        let da = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0]);
        let expect = -&ainv * da * &ainv;
        for i in 0..2 {
            for j in 0..2 {
                assert!((inv.at(i, j).eps[0] - expect[(i, j)]).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn singular_metric_rejected() {
        let g = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 1e-14]);
        assert!(matches!(
            metric_inverse(&g),
            Err(Error::SingularMetric { .. })
        ));
    }

    #[test]
    fn gram_schmidt_is_orthonormal_in_metric() {
        let g = DMatrix::from_row_slice(3, 3, &[2.0, 0.3, 0.0, 0.3, 1.0, 0.1, 0.0, 0.1, 4.0]);
        let cands: Vec<_> = (0..3)
            .map(|i| DVector::from_fn(3, |k, _| if k == i { 1.0 } else { 0.0 }))
            .collect();
        let e = gram_schmidt(&g, &cands, 1e-9, 3);
        assert_eq!(e.len(), 3);
        for a in 0..3 {
            for b in 0..3 {
                let want = if a == b { 1.0 } else { 0.0 };
                assert!((g_inner(&g, &e[a], &e[b]) - want).abs() < 1e-12);
            }
        }
    }
}
