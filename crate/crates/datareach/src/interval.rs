//! Closed-interval arithmetic over vectors, matrices and rank-3 tensors.

use crate::scalar::Scalar;
use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum IntervalError {
    #[error("invalid interval bounds [{lo}, {hi}]")]
    InvalidBounds { lo: f64, hi: f64 },
    #[error("square root of interval with negative part [{lo}, {hi}]")]
    NegativeDomain { lo: f64, hi: f64 },
    #[error("empty intersection")]
    EmptyIntersection,
    #[error("shape mismatch: expected {expected}, got {got}")]
    ShapeMismatch { expected: String, got: String },
}

fn shape_err(expected: impl fmt::Display, got: impl fmt::Display) -> IntervalError {
    IntervalError::ShapeMismatch {
        expected: expected.to_string(),
        got: got.to_string(),
    }
}

/// Product that treats `0 * inf` as zero.
#[inline]
fn pmul<T: Scalar>(a: T, b: T) -> T {
    if a == T::zero() || b == T::zero() {
        T::zero()
    } else {
        a * b
    }
}

/// A nonempty closed interval `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Interval<T> {
    lo: T,
    hi: T,
}

impl<T: Scalar> Interval<T> {
    pub fn new(lo: T, hi: T) -> Result<Self, IntervalError> {
        if lo.is_nan() || hi.is_nan() || lo > hi {
            return Err(IntervalError::InvalidBounds {
                lo: lo.as_f64(),
                hi: hi.as_f64(),
            });
        }
        Ok(Self { lo, hi })
    }

    /// Builds `[min(a,b), max(a,b)]`.
    pub fn hull_of(a: T, b: T) -> Self {
        Self {
            lo: a.min(b),
            hi: a.max(b),
        }
    }

    pub fn point(x: T) -> Self {
        Self { lo: x, hi: x }
    }

    /// `[-r, r]` for `r >= 0`.
    pub fn symmetric(r: T) -> Self {
        let r = r.abs();
        Self { lo: -r, hi: r }
    }

    pub fn zero() -> Self {
        Self::point(T::zero())
    }

    pub fn lo(&self) -> T {
        self.lo
    }

    pub fn hi(&self) -> T {
        self.hi
    }

    pub fn width(&self) -> T {
        self.hi - self.lo
    }

    pub fn mid(&self) -> T {
        if self.lo == self.hi {
            self.lo
        } else {
            self.lo + (self.hi - self.lo) / T::of(2.0)
        }
    }

    pub fn radius(&self) -> T {
        (self.hi - self.lo) / T::of(2.0)
    }

    /// Magnitude `max(|lo|, |hi|)`.
    pub fn abs(&self) -> T {
        self.lo.abs().max(self.hi.abs())
    }

    pub fn is_point(&self) -> bool {
        self.lo == self.hi
    }

    pub fn contains(&self, x: T) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn subset_of(&self, other: &Self) -> bool {
        other.lo <= self.lo && self.hi <= other.hi
    }

    pub fn intersect(&self, other: &Self) -> Option<Self> {
        let lo = self.lo.max(other.lo);
        let hi = self.hi.min(other.hi);
        (lo <= hi).then_some(Self { lo, hi })
    }

    /// Intersection that tolerates a gap of at most `tol` between the
    /// operands, returning the gap itself in that case.
    pub fn intersect_tol(&self, other: &Self, tol: T) -> Option<Self> {
        let lo = self.lo.max(other.lo);
        let hi = self.hi.min(other.hi);
        if lo <= hi {
            Some(Self { lo, hi })
        } else if lo - hi <= tol {
            Some(Self { lo: hi, hi: lo })
        } else {
            None
        }
    }

    pub fn hull(&self, other: &Self) -> Self {
        Self {
            lo: self.lo.min(other.lo),
            hi: self.hi.max(other.hi),
        }
    }

    /// Widens both endpoints by `eps >= 0`.
    pub fn inflate(&self, eps: T) -> Self {
        Self {
            lo: self.lo - eps,
            hi: self.hi + eps,
        }
    }

    /// Scales the radius about the midpoint by `factor` and adds `abs` on each side.
    pub fn scale_about_mid(&self, factor: T, abs: T) -> Self {
        let m = self.mid();
        let r = self.radius() * factor + abs;
        Self { lo: m - r, hi: m + r }
    }

    pub fn scale(&self, s: T) -> Self {
        Self::hull_of(self.lo * s, self.hi * s)
    }

    /// Division by a nonzero real.
    pub fn div_scalar(&self, s: T) -> Self {
        Self::hull_of(self.lo / s, self.hi / s)
    }

    /// Square root, defined for intervals inside `[0, inf)`.
    pub fn sqrt_ext(&self) -> Result<Self, IntervalError> {
        if self.lo < T::zero() {
            return Err(IntervalError::NegativeDomain {
                lo: self.lo.as_f64(),
                hi: self.hi.as_f64(),
            });
        }
        Ok(Self {
            lo: self.lo.sqrt(),
            hi: self.hi.sqrt(),
        })
    }

    /// Tight square `{x^2 : x in self}`.
    pub fn sqr_ext(&self) -> Self {
        let (a, b) = (self.lo * self.lo, self.hi * self.hi);
        if self.lo >= T::zero() {
            Self { lo: a, hi: b }
        } else if self.hi <= T::zero() {
            Self { lo: b, hi: a }
        } else {
            Self {
                lo: T::zero(),
                hi: a.max(b),
            }
        }
    }

    /// `[0, t] * self` for `t >= 0`.
    pub fn times_interval_from_zero(&self, t: T) -> Self {
        Self {
            lo: T::zero().min(self.lo * t),
            hi: T::zero().max(self.hi * t),
        }
    }

    /// Tight cosine range.
    pub fn cos(&self) -> Self {
        let two_pi = T::of(2.0 * std::f64::consts::PI);
        let pi = T::of(std::f64::consts::PI);
        if self.width() >= two_pi {
            return Self {
                lo: -T::one(),
                hi: T::one(),
            };
        }
        let (ca, cb) = (self.lo.cos(), self.hi.cos());
        let mut lo = ca.min(cb);
        let mut hi = ca.max(cb);
        // maxima at 2k*pi, minima at (2k+1)*pi
        let k_max = (self.lo / two_pi).ceil();
        if k_max * two_pi <= self.hi {
            hi = T::one();
        }
        let k_min = ((self.lo - pi) / two_pi).ceil();
        if k_min * two_pi + pi <= self.hi {
            lo = -T::one();
        }
        Self { lo, hi }
    }

    /// Tight sine range.
    pub fn sin(&self) -> Self {
        let half_pi = T::of(std::f64::consts::FRAC_PI_2);
        Self {
            lo: self.lo - half_pi,
            hi: self.hi - half_pi,
        }
        .cos()
    }
}

impl<T: Scalar> fmt::Display for Interval<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

impl<T: Scalar> Add for Interval<T> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self {
            lo: self.lo + rhs.lo,
            hi: self.hi + rhs.hi,
        }
    }
}

impl<T: Scalar> Sub for Interval<T> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Self {
            lo: self.lo - rhs.hi,
            hi: self.hi - rhs.lo,
        }
    }
}

impl<T: Scalar> Neg for Interval<T> {
    type Output = Self;
    fn neg(self) -> Self {
        Self {
            lo: -self.hi,
            hi: -self.lo,
        }
    }
}

impl<T: Scalar> Mul for Interval<T> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        let p = [
            pmul(self.lo, rhs.lo),
            pmul(self.lo, rhs.hi),
            pmul(self.hi, rhs.lo),
            pmul(self.hi, rhs.hi),
        ];
        Self {
            lo: p.iter().copied().fold(T::infinity(), T::min),
            hi: p.iter().copied().fold(T::neg_infinity(), T::max),
        }
    }
}

impl<T: Scalar> Mul<T> for Interval<T> {
    type Output = Self;
    fn mul(self, rhs: T) -> Self {
        self.scale(rhs)
    }
}

impl<T: Scalar> Add<T> for Interval<T> {
    type Output = Self;
    fn add(self, rhs: T) -> Self {
        Self {
            lo: self.lo + rhs,
            hi: self.hi + rhs,
        }
    }
}

impl<T: Scalar> Sub<T> for Interval<T> {
    type Output = Self;
    fn sub(self, rhs: T) -> Self {
        Self {
            lo: self.lo - rhs,
            hi: self.hi - rhs,
        }
    }
}

/// Interval vector (box).
#[derive(Debug, Clone, PartialEq, Default)]
pub struct IVector<T>(Vec<Interval<T>>);

impl<T: Scalar> IVector<T> {
    pub fn new(v: Vec<Interval<T>>) -> Self {
        Self(v)
    }

    pub fn from_point(x: &[T]) -> Self {
        Self(x.iter().map(|&v| Interval::point(v)).collect())
    }

    pub fn from_bounds(lo: &[T], hi: &[T]) -> Result<Self, IntervalError> {
        if lo.len() != hi.len() {
            return Err(shape_err(lo.len(), hi.len()));
        }
        lo.iter()
            .zip(hi)
            .map(|(&a, &b)| Interval::new(a, b))
            .collect::<Result<Vec<_>, _>>()
            .map(Self)
    }

    pub fn filled(n: usize, iv: Interval<T>) -> Self {
        Self(vec![iv; n])
    }

    pub fn zeros(n: usize) -> Self {
        Self::filled(n, Interval::zero())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[Interval<T>] {
        &self.0
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Interval<T>> {
        self.0.iter()
    }

    pub fn lo(&self) -> Vec<T> {
        self.0.iter().map(Interval::lo).collect()
    }

    pub fn hi(&self) -> Vec<T> {
        self.0.iter().map(Interval::hi).collect()
    }

    pub fn mid(&self) -> Vec<T> {
        self.0.iter().map(Interval::mid).collect()
    }

    pub fn widths(&self) -> Vec<T> {
        self.0.iter().map(Interval::width).collect()
    }

    /// Componentwise magnitudes.
    pub fn abs(&self) -> Vec<T> {
        self.0.iter().map(Interval::abs).collect()
    }

    pub fn max_width(&self) -> T {
        self.0.iter().map(Interval::width).fold(T::zero(), T::max)
    }

    pub fn sum_width(&self) -> T {
        self.0.iter().map(Interval::width).sum()
    }

    /// `max_k |V_k|`.
    pub fn inf_norm(&self) -> T {
        self.0.iter().map(Interval::abs).fold(T::zero(), T::max)
    }

    /// Interval enclosure of the Euclidean norm.
    pub fn norm2_ext(&self) -> Interval<T> {
        let s = self
            .0
            .iter()
            .fold(Interval::zero(), |acc, v| acc + v.sqr_ext());
        s.sqrt_ext().expect("sum of squares is nonnegative")
    }

    pub fn contains_point(&self, x: &[T]) -> bool {
        x.len() == self.len() && self.0.iter().zip(x).all(|(iv, &v)| iv.contains(v))
    }

    pub fn subset_of(&self, other: &Self) -> bool {
        self.len() == other.len() && self.0.iter().zip(&other.0).all(|(a, b)| a.subset_of(b))
    }

    pub fn intersect(&self, other: &Self) -> Option<Self> {
        if self.len() != other.len() {
            return None;
        }
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| a.intersect(b))
            .collect::<Option<Vec<_>>>()
            .map(Self)
    }

    pub fn hull(&self, other: &Self) -> Self {
        assert_eq!(self.len(), other.len(), "hull of boxes of different length");
        Self(self.0.iter().zip(&other.0).map(|(a, b)| a.hull(b)).collect())
    }

    pub fn inflate(&self, eps: T) -> Self {
        Self(self.0.iter().map(|iv| iv.inflate(eps)).collect())
    }

    pub fn scale(&self, s: T) -> Self {
        Self(self.0.iter().map(|iv| iv.scale(s)).collect())
    }

    pub fn scale_interval(&self, s: Interval<T>) -> Self {
        Self(self.0.iter().map(|&iv| iv * s).collect())
    }

    pub fn add_point(&self, x: &[T]) -> Self {
        assert_eq!(self.len(), x.len(), "box/point length mismatch");
        Self(self.0.iter().zip(x).map(|(&iv, &v)| iv + v).collect())
    }

    /// Sum of `self` and `[-r, r]` in every component.
    pub fn inflate_symmetric(&self, r: T) -> Self {
        self.inflate(r.abs())
    }
}

impl<T> Index<usize> for IVector<T> {
    type Output = Interval<T>;
    fn index(&self, i: usize) -> &Interval<T> {
        &self.0[i]
    }
}

impl<T> IndexMut<usize> for IVector<T> {
    fn index_mut(&mut self, i: usize) -> &mut Interval<T> {
        &mut self.0[i]
    }
}

impl<T: Scalar> FromIterator<Interval<T>> for IVector<T> {
    fn from_iter<I: IntoIterator<Item = Interval<T>>>(iter: I) -> Self {
        Self(iter.into_iter().collect())
    }
}

impl<T: Scalar> Add for &IVector<T> {
    type Output = IVector<T>;
    fn add(self, rhs: Self) -> IVector<T> {
        assert_eq!(self.len(), rhs.len(), "box length mismatch");
        IVector(self.0.iter().zip(&rhs.0).map(|(&a, &b)| a + b).collect())
    }
}

impl<T: Scalar> Sub for &IVector<T> {
    type Output = IVector<T>;
    fn sub(self, rhs: Self) -> IVector<T> {
        assert_eq!(self.len(), rhs.len(), "box length mismatch");
        IVector(self.0.iter().zip(&rhs.0).map(|(&a, &b)| a - b).collect())
    }
}

impl<T: Scalar> fmt::Display for IVector<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, iv) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{iv}")?;
        }
        write!(f, ")")
    }
}

/// Row-major interval matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct IMatrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<Interval<T>>,
}

impl<T: Scalar> IMatrix<T> {
    pub fn filled(rows: usize, cols: usize, iv: Interval<T>) -> Self {
        Self {
            rows,
            cols,
            data: vec![iv; rows * cols],
        }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self::filled(rows, cols, Interval::zero())
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Interval<T>) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Self { rows, cols, data }
    }

    /// Degenerate matrix from row-major point values.
    pub fn from_points(rows: usize, cols: usize, vals: &[T]) -> Result<Self, IntervalError> {
        if vals.len() != rows * cols {
            return Err(shape_err(rows * cols, vals.len()));
        }
        Ok(Self {
            rows,
            cols,
            data: vals.iter().map(|&v| Interval::point(v)).collect(),
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> Interval<T> {
        self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, iv: Interval<T>) {
        self.data[r * self.cols + c] = iv;
    }

    pub fn entries(&self) -> &[Interval<T>] {
        &self.data
    }

    pub fn lo(&self) -> Vec<T> {
        self.data.iter().map(Interval::lo).collect()
    }

    pub fn hi(&self) -> Vec<T> {
        self.data.iter().map(Interval::hi).collect()
    }

    pub fn mid(&self) -> Vec<T> {
        self.data.iter().map(Interval::mid).collect()
    }

    pub fn widths(&self) -> Vec<T> {
        self.data.iter().map(Interval::width).collect()
    }

    pub fn sum_width(&self) -> T {
        self.data.iter().map(Interval::width).sum()
    }

    pub fn map(&self, f: impl Fn(&Interval<T>) -> Interval<T>) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(f).collect(),
        }
    }

    pub fn scale(&self, s: T) -> Self {
        self.map(|iv| iv.scale(s))
    }

    pub fn contains_points(&self, vals: &[T]) -> bool {
        vals.len() == self.data.len() && self.data.iter().zip(vals).all(|(iv, &v)| iv.contains(v))
    }

    pub fn subset_of(&self, other: &Self) -> bool {
        self.rows == other.rows
            && self.cols == other.cols
            && self.data.iter().zip(&other.data).all(|(a, b)| a.subset_of(b))
    }

    pub fn intersect(&self, other: &Self) -> Option<Self> {
        if self.rows != other.rows || self.cols != other.cols {
            return None;
        }
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a.intersect(b))
            .collect::<Option<Vec<_>>>()?;
        Some(Self {
            rows: self.rows,
            cols: self.cols,
            data,
        })
    }

    pub fn hull(&self, other: &Self) -> Self {
        assert!(self.rows == other.rows && self.cols == other.cols);
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a.hull(b)).collect(),
        }
    }

    pub fn row(&self, r: usize) -> &[Interval<T>] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    /// Interval matrix times interval vector.
    pub fn mul_vec(&self, v: &IVector<T>) -> Result<IVector<T>, IntervalError> {
        if v.len() != self.cols {
            return Err(shape_err(format!("vector of length {}", self.cols), v.len()));
        }
        Ok((0..self.rows)
            .map(|r| {
                self.row(r)
                    .iter()
                    .zip(v.iter())
                    .fold(Interval::zero(), |acc, (&a, &b)| acc + a * b)
            })
            .collect())
    }

    /// Interval matrix times real vector.
    pub fn mul_point(&self, v: &[T]) -> Result<IVector<T>, IntervalError> {
        if v.len() != self.cols {
            return Err(shape_err(format!("vector of length {}", self.cols), v.len()));
        }
        Ok((0..self.rows)
            .map(|r| {
                self.row(r)
                    .iter()
                    .zip(v)
                    .fold(Interval::zero(), |acc, (&a, &b)| acc + a * b)
            })
            .collect())
    }

    pub fn mul_mat(&self, other: &Self) -> Result<Self, IntervalError> {
        if self.cols != other.rows {
            return Err(shape_err(
                format!("{} rows", self.cols),
                format!("{} rows", other.rows),
            ));
        }
        Ok(Self::from_fn(self.rows, other.cols, |r, c| {
            (0..self.cols).fold(Interval::zero(), |acc, k| acc + self.get(r, k) * other.get(k, c))
        }))
    }

    pub fn add(&self, other: &Self) -> Result<Self, IntervalError> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(shape_err(
                format!("{}x{}", self.rows, self.cols),
                format!("{}x{}", other.rows, other.cols),
            ));
        }
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(&a, &b)| a + b).collect(),
        })
    }
}

impl<T: Scalar> fmt::Display for IMatrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in 0..self.rows {
            write!(f, "[")?;
            for c in 0..self.cols {
                if c > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{}", self.get(r, c))?;
            }
            writeln!(f, "]")?;
        }
        Ok(())
    }
}

/// Rank-3 interval tensor indexed `(i, j, k)` with shape `(d0, d1, d2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ITensor3<T> {
    dims: (usize, usize, usize),
    data: Vec<Interval<T>>,
}

impl<T: Scalar> ITensor3<T> {
    pub fn filled(d0: usize, d1: usize, d2: usize, iv: Interval<T>) -> Self {
        Self {
            dims: (d0, d1, d2),
            data: vec![iv; d0 * d1 * d2],
        }
    }

    pub fn zeros(d0: usize, d1: usize, d2: usize) -> Self {
        Self::filled(d0, d1, d2, Interval::zero())
    }

    pub fn from_fn(
        d0: usize,
        d1: usize,
        d2: usize,
        mut f: impl FnMut(usize, usize, usize) -> Interval<T>,
    ) -> Self {
        let mut data = Vec::with_capacity(d0 * d1 * d2);
        for i in 0..d0 {
            for j in 0..d1 {
                for k in 0..d2 {
                    data.push(f(i, j, k));
                }
            }
        }
        Self {
            dims: (d0, d1, d2),
            data,
        }
    }

    pub fn dims(&self) -> (usize, usize, usize) {
        self.dims
    }

    fn idx(&self, i: usize, j: usize, k: usize) -> usize {
        (i * self.dims.1 + j) * self.dims.2 + k
    }

    pub fn get(&self, i: usize, j: usize, k: usize) -> Interval<T> {
        self.data[self.idx(i, j, k)]
    }

    pub fn set(&mut self, i: usize, j: usize, k: usize, iv: Interval<T>) {
        let id = self.idx(i, j, k);
        self.data[id] = iv;
    }

    pub fn entries(&self) -> &[Interval<T>] {
        &self.data
    }

    /// Swaps the last two indices.
    pub fn transpose(&self) -> Self {
        let (d0, d1, d2) = self.dims;
        Self::from_fn(d0, d2, d1, |i, k, j| self.get(i, j, k))
    }

    pub fn subset_of(&self, other: &Self) -> bool {
        self.dims == other.dims && self.data.iter().zip(&other.data).all(|(a, b)| a.subset_of(b))
    }
}

/// Contraction over the middle index: `(J V)_{k,p} = sum_l J_{k,l,p} V_l`.
pub fn tensor_vec<T: Scalar>(j: &ITensor3<T>, v: &IVector<T>) -> Result<IMatrix<T>, IntervalError> {
    let (d0, d1, d2) = j.dims();
    if v.len() != d1 {
        return Err(shape_err(format!("vector of length {d1}"), v.len()));
    }
    Ok(IMatrix::from_fn(d0, d2, |k, p| {
        (0..d1).fold(Interval::zero(), |acc, l| acc + j.get(k, l, p) * v[l])
    }))
}

/// Contraction over the last index: `(J^T w)_{k,l} = sum_p J_{k,l,p} w_p`.
pub fn tensor_t_vec<T: Scalar>(j: &ITensor3<T>, w: &IVector<T>) -> Result<IMatrix<T>, IntervalError> {
    let (d0, d1, d2) = j.dims();
    if w.len() != d2 {
        return Err(shape_err(format!("vector of length {d2}"), w.len()));
    }
    Ok(IMatrix::from_fn(d0, d1, |k, l| {
        (0..d2).fold(Interval::zero(), |acc, p| acc + j.get(k, l, p) * w[p])
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn iv(a: f64, b: f64) -> Interval<f64> {
        Interval::new(a, b).unwrap()
    }

    #[test]
    fn basic_ops() {
        assert_eq!(iv(1.0, 2.0) * iv(-1.0, 3.0), iv(-2.0, 6.0));
        assert_eq!(iv(1.0, 2.0) - iv(0.5, 1.0), iv(0.0, 1.5));
        assert_eq!(iv(-2.0, 3.0).abs(), 3.0);
        assert!(Interval::new(2.0, 1.0).is_err());
    }

    #[test]
    fn intersection_empty_is_signaled() {
        assert!(iv(0.0, 1.0).intersect(&iv(2.0, 3.0)).is_none());
        assert_eq!(iv(0.0, 2.0).intersect(&iv(1.0, 3.0)), Some(iv(1.0, 2.0)));
        assert!(iv(0.0, 1.0).intersect_tol(&iv(1.0 + 1e-14, 2.0), 1e-12).unwrap().width() < 1e-13);
    }

    #[test]
    fn sqr_and_sqrt() {
        assert_eq!(iv(-2.0, 1.0).sqr_ext(), iv(0.0, 4.0));
        assert_eq!(iv(-3.0, -1.0).sqr_ext(), iv(1.0, 9.0));
        assert_eq!(iv(4.0, 9.0).sqrt_ext().unwrap(), iv(2.0, 3.0));
        assert!(matches!(iv(-1.0, 4.0).sqrt_ext(), Err(IntervalError::NegativeDomain { .. })));
    }

    #[test]
    fn norm2_of_point() {
        let v = IVector::from_point(&[3.0, 4.0]);
        assert_eq!(v.norm2_ext(), iv(5.0, 5.0));
    }

    #[test]
    fn cos_range() {
        let c = iv(-0.5, 0.5).cos();
        assert_eq!(c.hi(), 1.0);
        assert!((c.lo() - 0.5f64.cos()).abs() < 1e-15);
        assert_eq!(iv(3.0, 3.5).cos().lo(), -1.0);
        let s = iv(0.0, 0.1).sin();
        assert!(s.lo().abs() < 1e-15 && (s.hi() - 0.1f64.sin()).abs() < 1e-15);
    }

    #[test]
    fn matvec_identity() {
        let m = IMatrix::from_points(2, 2, &[1.0, 0.0, 0.0, 1.0]).unwrap();
        let v = IVector::new(vec![iv(0.0, 1.0), iv(2.0, 3.0)]);
        assert_eq!(m.mul_vec(&v).unwrap(), v);
        assert!(m.mul_vec(&IVector::zeros(3)).is_err());
    }

    #[test]
    fn tensor_contractions_agree_through_transpose() {
        let j = ITensor3::from_fn(2, 3, 2, |a, b, c| iv(-(a as f64), (b + c) as f64));
        let w = IVector::new(vec![iv(1.0, 2.0), iv(-1.0, 0.5)]);
        let direct = tensor_t_vec(&j, &w).unwrap();
        let via = tensor_vec(&j.transpose(), &w).unwrap();
        assert_eq!(direct, via);
    }
}
