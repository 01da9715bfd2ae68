//! Small dense real matrices.

use crate::scalar::Scalar;

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Mat<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Scalar> Mat<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, T::one());
        }
        m
    }

    pub fn diag(d: &[T]) -> Self {
        let mut m = Self::zeros(d.len(), d.len());
        for (i, &v) in d.iter().enumerate() {
            m.set(i, i, v);
        }
        m
    }

    /// Builds from row-major data; panics if the length does not match.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<T>) -> Self {
        assert_eq!(data.len(), rows * cols, "matrix data length");
        Self { rows, cols, data }
    }

    pub fn from_rows(rows: &[Vec<T>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c, "ragged rows");
            data.extend_from_slice(row);
        }
        Self { rows: r, cols: c, data }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Self { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn get(&self, r: usize, c: usize) -> T {
        self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: T) {
        self.data[r * self.cols + c] = v;
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self.get(c, r))
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "matmul shape");
        Self::from_fn(self.rows, other.cols, |r, c| {
            (0..self.cols).map(|k| self.get(r, k) * other.get(k, c)).sum()
        })
    }

    pub fn matvec(&self, v: &[T]) -> Vec<T> {
        assert_eq!(self.cols, v.len(), "matvec shape");
        (0..self.rows)
            .map(|r| (0..self.cols).map(|c| self.get(r, c) * v[c]).sum())
            .collect()
    }

    /// `self^T v`.
    pub fn tmatvec(&self, v: &[T]) -> Vec<T> {
        assert_eq!(self.rows, v.len(), "tmatvec shape");
        (0..self.cols)
            .map(|c| (0..self.rows).map(|r| self.get(r, c) * v[r]).sum())
            .collect()
    }

    pub fn add(&self, other: &Self) -> Self {
        assert!(self.rows == other.rows && self.cols == other.cols, "add shape");
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(&a, &b)| a + b).collect(),
        }
    }

    pub fn scale(&self, s: T) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&a| a * s).collect(),
        }
    }

    /// Induced infinity norm (maximum absolute row sum).
    pub fn inf_norm(&self) -> T {
        (0..self.rows)
            .map(|r| (0..self.cols).map(|c| self.get(r, c).abs()).sum::<T>())
            .fold(T::zero(), T::max)
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().map(|v| v.abs()).fold(T::zero(), T::max)
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    /// Largest absolute asymmetry `|a_ij - a_ji|`.
    pub fn asymmetry(&self) -> T {
        let mut worst = T::zero();
        for r in 0..self.rows {
            for c in 0..self.cols.min(self.rows) {
                worst = worst.max((self.get(r, c) - self.get(c, r)).abs());
            }
        }
        worst
    }

    /// `(A + A^T) / 2`.
    pub fn symmetrize(&self) -> Self {
        let half = T::of(0.5);
        Self::from_fn(self.rows, self.cols, |r, c| (self.get(r, c) + self.get(c, r)) * half)
    }

    /// Sub-matrix on the given row and column index sets.
    pub fn select(&self, rows: &[usize], cols: &[usize]) -> Self {
        Self::from_fn(rows.len(), cols.len(), |r, c| self.get(rows[r], cols[c]))
    }

    /// Solves `self x = b` by Gaussian elimination with partial pivoting.
    /// Returns `None` when a pivot falls below `tol` times the largest entry.
    pub fn solve(&self, b: &[T], tol: T) -> Option<Vec<T>> {
        assert!(self.is_square() && b.len() == self.rows, "solve shape");
        let n = self.rows;
        if n == 0 {
            return Some(Vec::new());
        }
        let scale = self.max_abs().max(T::min_positive_value());
        let mut a = self.data.clone();
        let mut x = b.to_vec();
        for col in 0..n {
            let piv = (col..n)
                .max_by(|&i, &j| a[i * n + col].abs().partial_cmp(&a[j * n + col].abs()).unwrap())
                .unwrap();
            if a[piv * n + col].abs() <= tol * scale {
                return None;
            }
            if piv != col {
                for c in 0..n {
                    a.swap(piv * n + c, col * n + c);
                }
                x.swap(piv, col);
            }
            let d = a[col * n + col];
            for r in col + 1..n {
                let f = a[r * n + col] / d;
                if f != T::zero() {
                    for c in col..n {
                        a[r * n + c] = a[r * n + c] - f * a[col * n + c];
                    }
                    x[r] = x[r] - f * x[col];
                }
            }
        }
        for r in (0..n).rev() {
            let mut s = x[r];
            for c in r + 1..n {
                s = s - a[r * n + c] * x[c];
            }
            x[r] = s / a[r * n + r];
        }
        Some(x)
    }

    /// Inverse via repeated solves.
    pub fn inverse(&self, tol: T) -> Option<Self> {
        let n = self.rows;
        let mut inv = Self::zeros(n, n);
        for c in 0..n {
            let mut e = vec![T::zero(); n];
            e[c] = T::one();
            let col = self.solve(&e, tol)?;
            for r in 0..n {
                inv.set(r, c, col[r]);
            }
        }
        Some(inv)
    }

    /// Eigen-decomposition of a symmetric matrix by cyclic Jacobi rotations.
    /// Returns eigenvalues and the matrix whose columns are eigenvectors.
    pub fn sym_eigen(&self) -> (Vec<T>, Self) {
        assert!(self.is_square(), "eigen of non-square matrix");
        let n = self.rows;
        let mut a = self.symmetrize();
        let mut v = Self::identity(n);
        let eps = T::epsilon();
        for _sweep in 0..100 {
            let mut off = T::zero();
            for r in 0..n {
                for c in 0..n {
                    if r != c {
                        off = off + a.get(r, c) * a.get(r, c);
                    }
                }
            }
            let total: T = a.data.iter().map(|&x| x * x).sum();
            if off <= eps * eps * total || off == T::zero() {
                break;
            }
            for p in 0..n {
                for q in p + 1..n {
                    let apq = a.get(p, q);
                    if apq == T::zero() {
                        continue;
                    }
                    let app = a.get(p, p);
                    let aqq = a.get(q, q);
                    let theta = (aqq - app) / (T::of(2.0) * apq);
                    let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
                    let t = if theta == T::zero() { T::one() } else { t };
                    let c = T::one() / (t * t + T::one()).sqrt();
                    let s = t * c;
                    for k in 0..n {
                        let akp = a.get(k, p);
                        let akq = a.get(k, q);
                        a.set(k, p, c * akp - s * akq);
                        a.set(k, q, s * akp + c * akq);
                    }
                    for k in 0..n {
                        let apk = a.get(p, k);
                        let aqk = a.get(q, k);
                        a.set(p, k, c * apk - s * aqk);
                        a.set(q, k, s * apk + c * aqk);
                    }
                    for k in 0..n {
                        let vkp = v.get(k, p);
                        let vkq = v.get(k, q);
                        v.set(k, p, c * vkp - s * vkq);
                        v.set(k, q, s * vkp + c * vkq);
                    }
                }
            }
        }
        ((0..n).map(|i| a.get(i, i)).collect(), v)
    }

    /// Smallest eigenvalue of a symmetric matrix.
    pub fn min_eigenvalue(&self) -> T {
        self.sym_eigen().0.into_iter().fold(T::infinity(), T::min)
    }
}

pub fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(&x, &y)| x * y).sum()
}

pub fn norm2<T: Scalar>(a: &[T]) -> T {
    dot(a, a).sqrt()
}

pub fn norm_inf<T: Scalar>(a: &[T]) -> T {
    a.iter().map(|v| v.abs()).fold(T::zero(), T::max)
}

pub fn axpy<T: Scalar>(alpha: T, x: &[T], y: &[T]) -> Vec<T> {
    x.iter().zip(y).map(|(&a, &b)| alpha * a + b).collect()
}

pub fn sub<T: Scalar>(a: &[T], b: &[T]) -> Vec<T> {
    a.iter().zip(b).map(|(&x, &y)| x - y).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solve_small_system() {
        let a = Mat::from_rows(&[vec![2.0, 1.0], vec![1.0, 3.0]]);
        let x: Vec<f64> = a.solve(&[3.0, 5.0], 1e-14).unwrap();
        assert!((x[0] - 0.8).abs() < 1e-14 && (x[1] - 1.4).abs() < 1e-14);
        let s = Mat::from_rows(&[vec![1.0, 2.0], vec![2.0, 4.0]]);
        assert!(s.solve(&[1.0, 1.0], 1e-12).is_none());
    }

    #[test]
    fn jacobi_eigenvalues() {
        let a = Mat::from_rows(&[vec![2.0, 1.0], vec![1.0, 2.0]]);
        let (mut ev, v): (Vec<f64>, Mat<f64>) = a.sym_eigen();
        ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!((ev[0] - 1.0).abs() < 1e-12 && (ev[1] - 3.0).abs() < 1e-12);
        let vtv = v.transpose().matmul(&v);
        assert!(vtv.get(0, 1).abs() < 1e-12);
    }

    #[test]
    fn induced_inf_norm() {
        let a = Mat::from_rows(&[vec![1.0, -2.0], vec![0.5, 0.5]]);
        assert_eq!(a.inf_norm(), 3.0);
    }
}
