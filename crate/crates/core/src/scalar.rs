//! Scalar fields for the displacement layer.
//!
//! Everything in the Gaussian layer is generic over [`Scalar`], so the same
//! code runs in `f64` and in the exact field Q(√2) ([`QSqrt2`]). The exact
//! field is closed under every gate the engine knows about except general
//! squeezing, whose `e^r` factor enters as the exact rational value of the
//! `f64` it was given.

use num::{BigInt, BigRational, One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

pub trait Scalar:
    Clone
    + PartialEq
    + fmt::Debug
    + fmt::Display
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn zero() -> Self;
    fn one() -> Self;
    fn from_i64(v: i64) -> Self;
    /// Exact for `QSqrt2` (every finite `f64` is a dyadic rational).
    fn from_f64(v: f64) -> Self;
    fn to_f64(&self) -> f64;
    fn sqrt2() -> Self;
    fn is_zero(&self) -> bool;

    fn ratio(num: i64, den: i64) -> Self {
        Self::from_i64(num) / Self::from_i64(den)
    }
    fn frac_1_sqrt2() -> Self {
        Self::sqrt2() / Self::from_i64(2)
    }
}

impl Scalar for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn from_i64(v: i64) -> Self {
        v as f64
    }
    fn from_f64(v: f64) -> Self {
        v
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn sqrt2() -> Self {
        std::f64::consts::SQRT_2
    }
    fn is_zero(&self) -> bool {
        *self == 0.0
    }
    fn frac_1_sqrt2() -> Self {
        std::f64::consts::FRAC_1_SQRT_2
    }
}

/// `a + b·√2` with rational `a`, `b`.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct QSqrt2 {
    pub a: BigRational,
    pub b: BigRational,
}

impl QSqrt2 {
    pub fn new(a: BigRational, b: BigRational) -> Self {
        QSqrt2 { a, b }
    }

    pub fn rational(a: BigRational) -> Self {
        QSqrt2 { a, b: BigRational::zero() }
    }

    pub fn from_ratio(num: i64, den: i64) -> Self {
        Self::rational(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    /// `(num/den)·√2`.
    pub fn sqrt2_ratio(num: i64, den: i64) -> Self {
        QSqrt2 {
            a: BigRational::zero(),
            b: BigRational::new(BigInt::from(num), BigInt::from(den)),
        }
    }

    pub fn is_rational(&self) -> bool {
        self.b.is_zero()
    }

    /// Galois conjugate `a − b√2`.
    pub fn conj(&self) -> Self {
        QSqrt2 { a: self.a.clone(), b: -self.b.clone() }
    }

    /// Field norm `a² − 2b²`.
    pub fn norm(&self) -> BigRational {
        &self.a * &self.a - BigRational::from_integer(BigInt::from(2)) * &self.b * &self.b
    }

    pub fn signum(&self) -> i32 {
        // sign of a + b√2 decided exactly by comparing squares
        let sa = sign_of(&self.a);
        let sb = sign_of(&self.b);
        if sb == 0 {
            return sa;
        }
        if sa == 0 || sa == sb {
            return if sa == 0 { sb } else { sa };
        }
        let a2 = &self.a * &self.a;
        let b2 = BigRational::from_integer(BigInt::from(2)) * &self.b * &self.b;
        if a2 > b2 {
            sa
        } else if a2 < b2 {
            sb
        } else {
            0
        }
    }
}

fn sign_of(r: &BigRational) -> i32 {
    if r.is_zero() {
        0
    } else if r.is_positive() {
        1
    } else {
        -1
    }
}

impl PartialOrd for QSqrt2 {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some((self.clone() - other.clone()).signum().cmp(&0))
    }
}

impl fmt::Debug for QSqrt2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for QSqrt2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.a.is_zero(), self.b.is_zero()) {
            (_, true) => write!(f, "{}", self.a),
            (true, false) => write!(f, "{}√2", self.b),
            (false, false) => write!(f, "{}+{}√2", self.a, self.b),
        }
    }
}

impl Add for QSqrt2 {
    type Output = QSqrt2;
    fn add(self, o: QSqrt2) -> QSqrt2 {
        QSqrt2 { a: self.a + o.a, b: self.b + o.b }
    }
}

impl Sub for QSqrt2 {
    type Output = QSqrt2;
    fn sub(self, o: QSqrt2) -> QSqrt2 {
        QSqrt2 { a: self.a - o.a, b: self.b - o.b }
    }
}

impl Mul for QSqrt2 {
    type Output = QSqrt2;
    fn mul(self, o: QSqrt2) -> QSqrt2 {
        let two = BigRational::from_integer(BigInt::from(2));
        QSqrt2 {
            a: &self.a * &o.a + two * &self.b * &o.b,
            b: &self.a * &o.b + &self.b * &o.a,
        }
    }
}

impl Div for QSqrt2 {
    type Output = QSqrt2;
    fn div(self, o: QSqrt2) -> QSqrt2 {
        let n = o.norm();
        assert!(!n.is_zero(), "division by zero in Q(√2)");
        let num = self * o.conj();
        QSqrt2 { a: num.a / &n, b: num.b / n }
    }
}

impl Neg for QSqrt2 {
    type Output = QSqrt2;
    fn neg(self) -> QSqrt2 {
        QSqrt2 { a: -self.a, b: -self.b }
    }
}

impl Scalar for QSqrt2 {
    fn zero() -> Self {
        Self::rational(BigRational::zero())
    }
    fn one() -> Self {
        Self::rational(BigRational::one())
    }
    fn from_i64(v: i64) -> Self {
        Self::rational(BigRational::from_integer(BigInt::from(v)))
    }
    fn from_f64(v: f64) -> Self {
        Self::rational(BigRational::from_float(v).expect("finite f64"))
    }
    fn to_f64(&self) -> f64 {
        self.a.to_f64().unwrap_or(f64::NAN) + self.b.to_f64().unwrap_or(f64::NAN) * std::f64::consts::SQRT_2
    }
    fn sqrt2() -> Self {
        QSqrt2 { a: BigRational::zero(), b: BigRational::one() }
    }
    fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }
}

/// Row-major dense matrix over any [`Scalar`].
#[derive(Clone, PartialEq, Serialize, Deserialize)]
pub struct Mat<T> {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<T>,
}

impl<T: Scalar> Mat<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat { rows, cols, data: vec![T::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl Fn(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Mat { rows, cols, data }
    }

    pub fn diag(d: &[T]) -> Self {
        let mut m = Self::zeros(d.len(), d.len());
        for (i, v) in d.iter().enumerate() {
            m[(i, i)] = v.clone();
        }
        m
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].clone())
    }

    pub fn matmul(&self, o: &Mat<T>) -> Mat<T> {
        assert_eq!(self.cols, o.rows, "matmul shape");
        let mut out = Mat::zeros(self.rows, o.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..o.cols {
                    let b = &o[(k, j)];
                    if b.is_zero() {
                        continue;
                    }
                    let prod = a.clone() * b.clone();
                    let cur = std::mem::replace(&mut out[(i, j)], T::zero());
                    out[(i, j)] = cur + prod;
                }
            }
        }
        out
    }

    pub fn matvec(&self, v: &[T]) -> Vec<T> {
        assert_eq!(self.cols, v.len(), "matvec shape");
        (0..self.rows)
            .map(|i| {
                let mut acc = T::zero();
                for (j, vj) in v.iter().enumerate() {
                    let a = &self[(i, j)];
                    if !a.is_zero() && !vj.is_zero() {
                        acc = acc + a.clone() * vj.clone();
                    }
                }
                acc
            })
            .collect()
    }

    pub fn select(&self, rows: &[usize], cols: &[usize]) -> Mat<T> {
        Self::from_fn(rows.len(), cols.len(), |i, j| self[(rows[i], cols[j])].clone())
    }

    pub fn symmetrize(&self) -> Mat<T> {
        let half = T::ratio(1, 2);
        Self::from_fn(self.rows, self.cols, |i, j| {
            if self[(i, j)] == self[(j, i)] {
                self[(i, j)].clone()
            } else {
                (self[(i, j)].clone() + self[(j, i)].clone()) * half.clone()
            }
        })
    }

    pub fn to_f64(&self) -> Mat<f64> {
        Mat { rows: self.rows, cols: self.cols, data: self.data.iter().map(|x| x.to_f64()).collect() }
    }

    pub fn to_nalgebra(&self) -> nalgebra::DMatrix<f64> {
        nalgebra::DMatrix::from_fn(self.rows, self.cols, |i, j| self[(i, j)].to_f64())
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }
}

impl Mat<f64> {
    pub fn max_abs_diff(&self, o: &Mat<f64>) -> f64 {
        assert_eq!((self.rows, self.cols), (o.rows, o.cols));
        self.data.iter().zip(&o.data).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }
}

impl<T> std::ops::Index<(usize, usize)> for Mat<T> {
    type Output = T;
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.cols + j]
    }
}

impl<T> std::ops::IndexMut<(usize, usize)> for Mat<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.cols + j]
    }
}

impl<T: fmt::Debug> fmt::Debug for Mat<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Mat {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for j in 0..self.cols {
                write!(f, "{:>10?} ", self.data[i * self.cols + j])?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sqrt2_field_ops() {
        let r = QSqrt2::sqrt2();
        assert_eq!(r.clone() * r.clone(), QSqrt2::from_i64(2));
        let x = QSqrt2::from_i64(3) + QSqrt2::sqrt2_ratio(1, 2);
        let y = x.clone() / x.clone();
        assert_eq!(y, QSqrt2::one());
        assert_eq!(QSqrt2::frac_1_sqrt2() * QSqrt2::sqrt2(), QSqrt2::one());
    }

    #[test]
    fn sqrt2_sign() {
        assert_eq!((QSqrt2::from_i64(1) - QSqrt2::sqrt2()).signum(), -1);
        assert_eq!((QSqrt2::from_i64(2) - QSqrt2::sqrt2()).signum(), 1);
        assert_eq!((QSqrt2::from_i64(-3) + QSqrt2::sqrt2_ratio(2, 1)).signum(), -1);
        assert_eq!(QSqrt2::zero().signum(), 0);
    }

    #[test]
    fn from_f64_is_exact() {
        let v = QSqrt2::from_f64(0.1);
        assert_eq!(v.to_f64(), 0.1);
        assert!(v != QSqrt2::from_ratio(1, 10));
    }
}
