//! Small dense vectors and matrices.
//!
//! Everything the toolkit solves is at most 5x5 (ambient sphere coordinates)
//! or a handful of hull generators, so plain `Vec` storage with partial
//! pivoting LU and Householder least squares is all that is needed.

use std::ops::{Index, IndexMut};

use crate::scalar::{lit, Real};

pub fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(&x, &y)| x * y).sum()
}

pub fn norm<T: Real>(a: &[T]) -> T {
    dot(a, a).sqrt()
}

pub fn add<T: Real>(a: &[T], b: &[T]) -> Vec<T> {
    a.iter().zip(b).map(|(&x, &y)| x + y).collect()
}

pub fn sub<T: Real>(a: &[T], b: &[T]) -> Vec<T> {
    a.iter().zip(b).map(|(&x, &y)| x - y).collect()
}

pub fn scale<T: Real>(a: &[T], s: T) -> Vec<T> {
    a.iter().map(|&x| x * s).collect()
}

/// `a + s * b`
pub fn axpy<T: Real>(a: &[T], s: T, b: &[T]) -> Vec<T> {
    a.iter().zip(b).map(|(&x, &y)| x + s * y).collect()
}

pub fn max_abs<T: Real>(a: &[T]) -> T {
    a.iter().fold(T::zero(), |m, &x| m.max(x.abs()))
}

/// Row-major dense matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Real> Matrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![T::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
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

    /// Builds a matrix whose columns are the given vectors.
    pub fn from_columns(cols: &[Vec<T>]) -> Self {
        let rows = cols.first().map_or(0, Vec::len);
        Self::from_fn(rows, cols.len(), |i, j| cols[j][i])
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn mul_vec(&self, v: &[T]) -> Vec<T> {
        debug_assert_eq!(v.len(), self.cols);
        (0..self.rows)
            .map(|i| dot(&self.data[i * self.cols..(i + 1) * self.cols], v))
            .collect()
    }

    /// `v^T M`, i.e. `M^T v`.
    pub fn tr_mul_vec(&self, v: &[T]) -> Vec<T> {
        debug_assert_eq!(v.len(), self.rows);
        let mut out = vec![T::zero(); self.cols];
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[j] = out[j] + self[(i, j)] * v[i];
            }
        }
        out
    }

    /// `a^T M b`
    pub fn bilinear(&self, a: &[T], b: &[T]) -> T {
        dot(a, &self.mul_vec(b))
    }

    pub fn max_abs(&self) -> T {
        max_abs(&self.data)
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn lu(&self) -> Option<Lu<T>> {
        Lu::factor(self)
    }

    pub fn solve(&self, b: &[T]) -> Option<Vec<T>> {
        self.lu().map(|lu| lu.solve(b))
    }

    pub fn det(&self) -> T {
        self.lu().map_or(T::zero(), |lu| lu.det())
    }
}

impl<T> Index<(usize, usize)> for Matrix<T> {
    type Output = T;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.cols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for Matrix<T> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.cols + j]
    }
}

/// LU factorization with partial pivoting.
#[derive(Clone, Debug)]
pub struct Lu<T> {
    n: usize,
    lu: Vec<T>,
    perm: Vec<usize>,
    sign: T,
}

impl<T: Real> Lu<T> {
    /// Returns `None` when a pivot is exactly zero or relatively negligible.
    pub fn factor(m: &Matrix<T>) -> Option<Self> {
        assert_eq!(m.rows, m.cols, "LU needs a square matrix");
        let n = m.rows;
        let mut lu = m.data.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut sign = T::one();
        let scale = m.max_abs();
        if scale == T::zero() {
            return None;
        }
        let tiny = scale * T::epsilon() * lit(16.0);
        for k in 0..n {
            let (p, pmax) = (k..n)
                .map(|i| (i, lu[i * n + k].abs()))
                .fold((k, T::neg_infinity()), |acc, c| if c.1 > acc.1 { c } else { acc });
            if !(pmax > tiny) {
                return None;
            }
            if p != k {
                for j in 0..n {
                    lu.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
                sign = -sign;
            }
            let pivot = lu[k * n + k];
            for i in k + 1..n {
                let f = lu[i * n + k] / pivot;
                lu[i * n + k] = f;
                for j in k + 1..n {
                    lu[i * n + j] = lu[i * n + j] - f * lu[k * n + j];
                }
            }
        }
        Some(Self { n, lu, perm, sign })
    }

    pub fn solve(&self, b: &[T]) -> Vec<T> {
        let n = self.n;
        let mut x: Vec<T> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            for j in 0..i {
                x[i] = x[i] - self.lu[i * n + j] * x[j];
            }
        }
        for i in (0..n).rev() {
            for j in i + 1..n {
                x[i] = x[i] - self.lu[i * n + j] * x[j];
            }
            x[i] = x[i] / self.lu[i * n + i];
        }
        x
    }

    pub fn det(&self) -> T {
        (0..self.n).fold(self.sign, |d, i| d * self.lu[i * self.n + i])
    }
}

/// Least-squares solution of `A x = b` by Householder QR.
///
/// Requires `rows >= cols` and full column rank; returns `None` otherwise.
pub fn least_squares<T: Real>(a: &Matrix<T>, b: &[T]) -> Option<Vec<T>> {
    let (m, n) = (a.rows, a.cols);
    if m < n {
        return None;
    }
    let mut r = a.clone();
    let mut rhs = b.to_vec();
    let scale = a.max_abs().max(T::min_positive_value());
    for k in 0..n {
        let alpha = (k..m).map(|i| r[(i, k)] * r[(i, k)]).sum::<T>().sqrt();
        if alpha <= scale * T::epsilon() * lit(64.0) {
            return None;
        }
        let alpha = if r[(k, k)] > T::zero() { -alpha } else { alpha };
        let mut v: Vec<T> = (k..m).map(|i| r[(i, k)]).collect();
        v[0] = v[0] - alpha;
        let vnorm2 = dot(&v, &v);
        if vnorm2 == T::zero() {
            continue;
        }
        let two = lit::<T>(2.0);
        for j in k..n {
            let s = (k..m).map(|i| v[i - k] * r[(i, j)]).sum::<T>() * two / vnorm2;
            for i in k..m {
                r[(i, j)] = r[(i, j)] - s * v[i - k];
            }
        }
        let s = (k..m).map(|i| v[i - k] * rhs[i]).sum::<T>() * two / vnorm2;
        for i in k..m {
            rhs[i] = rhs[i] - s * v[i - k];
        }
    }
    let mut x = vec![T::zero(); n];
    for i in (0..n).rev() {
        let mut acc = rhs[i];
        for j in i + 1..n {
            acc = acc - r[(i, j)] * x[j];
        }
        x[i] = acc / r[(i, i)];
    }
    Some(x)
}

/// Non-negative least squares (Lawson–Hanson active set).
///
/// Minimizes `|A x - b|` subject to `x >= 0`; terminates in finitely many
/// active-set changes.
pub fn nnls<T: Real>(a: &Matrix<T>, b: &[T]) -> Vec<T> {
    let n = a.cols;
    let mut x = vec![T::zero(); n];
    let mut passive = vec![false; n];
    let tol = lit::<T>(1e3) * T::epsilon() * a.max_abs().max(T::one()) * norm(b).max(T::one());
    let max_outer = 3 * n + 10;

    let residual = |x: &[T]| -> Vec<T> { sub(b, &a.mul_vec(x)) };

    for _ in 0..max_outer {
        let w = a.tr_mul_vec(&residual(&x));
        let candidate = (0..n)
            .filter(|&j| !passive[j])
            .map(|j| (j, w[j]))
            .fold(None, |best: Option<(usize, T)>, c| match best {
                Some(b) if b.1 >= c.1 => Some(b),
                _ => Some(c),
            });
        let Some((t, wt)) = candidate else { break };
        if wt <= tol {
            break;
        }
        passive[t] = true;

        for _ in 0..(3 * n + 10) {
            let idx: Vec<usize> = (0..n).filter(|&j| passive[j]).collect();
            let sub_a = Matrix::from_fn(a.rows, idx.len(), |i, k| a[(i, idx[k])]);
            let Some(s_p) = least_squares(&sub_a, b) else {
                // Dependent column entered; drop it and stop growing the set.
                passive[t] = false;
                break;
            };
            let mut s = vec![T::zero(); n];
            for (k, &j) in idx.iter().enumerate() {
                s[j] = s_p[k];
            }
            if idx.iter().all(|&j| s[j] > T::zero()) {
                x = s;
                break;
            }
            let alpha = idx
                .iter()
                .filter(|&&j| s[j] <= T::zero())
                .map(|&j| x[j] / (x[j] - s[j]))
                .fold(T::one(), T::min);
            for j in 0..n {
                x[j] = x[j] + alpha * (s[j] - x[j]);
                if passive[j] && x[j] <= tol {
                    x[j] = T::zero();
                    passive[j] = false;
                }
            }
        }
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn lu_solves_and_reports_determinant() {
        let a = Matrix::from_fn(3, 3, |i, j| [[2.0, 1.0, 0.0], [1.0, 3.0, 1.0], [0.0, 1.0, 4.0]][i][j]);
        let x = a.solve(&[1.0, 2.0, 3.0]).unwrap();
        let back = a.mul_vec(&x);
        for (u, v) in back.iter().zip([1.0, 2.0, 3.0]) {
            assert_abs_diff_eq!(*u, v, epsilon = 1e-14);
        }
        assert_abs_diff_eq!(a.det(), 18.0, epsilon = 1e-12);
    }

    #[test]
    fn singular_matrix_has_no_lu() {
        let a = Matrix::from_fn(2, 2, |i, _| if i == 0 { 1.0 } else { 2.0 });
        assert!(a.lu().is_none());
        assert_eq!(a.det(), 0.0);
    }

    #[test]
    fn least_squares_fits_overdetermined_line() {
        // y = 1 + 2t sampled exactly
        let ts = [0.0, 1.0, 2.0, 3.0];
        let a = Matrix::from_fn(4, 2, |i, j| if j == 0 { 1.0 } else { ts[i] });
        let b: Vec<f64> = ts.iter().map(|t| 1.0 + 2.0 * t).collect();
        let x = least_squares(&a, &b).unwrap();
        assert_abs_diff_eq!(x[0], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(x[1], 2.0, epsilon = 1e-12);
    }

    #[test]
    fn nnls_clamps_negative_components() {
        let a = Matrix::identity(2);
        let x = nnls(&a, &[1.0, -1.0]);
        assert_abs_diff_eq!(x[0], 1.0, epsilon = 1e-14);
        assert_eq!(x[1], 0.0);
    }

    #[test]
    fn nnls_finds_convex_weights() {
        // generators (-1,0), (1,0), (0,1); target (0.2, 0.3) with sum-to-one row
        let a = Matrix::from_fn(3, 3, |i, j| {
            [[-1.0, 1.0, 0.0], [0.0, 0.0, 1.0], [1.0, 1.0, 1.0]][i][j]
        });
        let x = nnls(&a, &[0.2, 0.3, 1.0]);
        let r = sub(&a.mul_vec(&x), &[0.2, 0.3, 1.0]);
        assert!(norm(&r) < 1e-12);
        assert!(x.iter().all(|&v| v >= 0.0));
    }
}
