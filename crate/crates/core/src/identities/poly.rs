//! Dense univariate polynomials over exact rationals.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::tridiag::{DenseMatrix, RationalTridiag};

/// Coefficients in ascending degree; never has a trailing zero, so the
/// zero polynomial is the empty vector.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct RationalPoly {
    coeffs: Vec<BigRational>,
}

pub(crate) fn q(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

impl RationalPoly {
    pub fn from_coeffs(mut coeffs: Vec<BigRational>) -> Self {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::constant(BigRational::one())
    }

    pub fn constant(c: BigRational) -> Self {
        Self::from_coeffs(vec![c])
    }

    /// The monomial `lambda`.
    pub fn var() -> Self {
        Self::from_coeffs(vec![BigRational::zero(), BigRational::one()])
    }

    /// `lambda - c`.
    pub fn linear_root(c: &BigRational) -> Self {
        Self::from_coeffs(vec![-c.clone(), BigRational::one()])
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    /// Coefficient of `lambda^k`, zero past the degree.
    pub fn coeff(&self, k: usize) -> BigRational {
        self.coeffs.get(k).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn eval(&self, x: &BigRational) -> BigRational {
        self.coeffs
            .iter()
            .rev()
            .fold(BigRational::zero(), |acc, c| acc * x + c)
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        Self::from_coeffs(self.coeffs.iter().map(|a| a * c).collect())
    }

    pub fn derivative(&self) -> Self {
        Self::from_coeffs(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, c)| c * q(k as i64))
                .collect(),
        )
    }

    /// The unique polynomial of degree `< points.len()` through the given
    /// points (Newton divided differences). Panics on repeated abscissae.
    pub fn interpolate(points: &[(BigRational, BigRational)]) -> Self {
        let m = points.len();
        let xs: Vec<&BigRational> = points.iter().map(|(x, _)| x).collect();
        let mut dd: Vec<BigRational> = points.iter().map(|(_, y)| y.clone()).collect();
        for level in 1..m {
            for i in (level..m).rev() {
                let den = xs[i] - xs[i - level];
                assert!(!den.is_zero(), "repeated interpolation node");
                dd[i] = (&dd[i] - &dd[i - 1]) / den;
            }
        }
        let mut out = Self::zero();
        for i in (0..m).rev() {
            out = &(&out * &Self::linear_root(xs[i])) + &Self::constant(dd[i].clone());
        }
        out
    }

    /// Interpolates a polynomial of degree at most `degree` from its values
    /// at `0, 1, ..., degree`.
    pub fn from_samples(degree: usize, mut f: impl FnMut(&BigRational) -> BigRational) -> Self {
        let pts: Vec<_> = (0..=degree as i64)
            .map(|k| {
                let x = q(k);
                let y = f(&x);
                (x, y)
            })
            .collect();
        Self::interpolate(&pts)
    }
}

impl Add for &RationalPoly {
    type Output = RationalPoly;

    fn add(self, rhs: &RationalPoly) -> RationalPoly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        RationalPoly::from_coeffs((0..n).map(|k| self.coeff(k) + rhs.coeff(k)).collect())
    }
}

impl Sub for &RationalPoly {
    type Output = RationalPoly;

    fn sub(self, rhs: &RationalPoly) -> RationalPoly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        RationalPoly::from_coeffs((0..n).map(|k| self.coeff(k) - rhs.coeff(k)).collect())
    }
}

impl Mul for &RationalPoly {
    type Output = RationalPoly;

    fn mul(self, rhs: &RationalPoly) -> RationalPoly {
        if self.is_zero() || rhs.is_zero() {
            return RationalPoly::zero();
        }
        let mut out = vec![BigRational::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        RationalPoly::from_coeffs(out)
    }
}

impl Neg for &RationalPoly {
    type Output = RationalPoly;

    fn neg(self) -> RationalPoly {
        RationalPoly::from_coeffs(self.coeffs.iter().map(|c| -c).collect())
    }
}

impl std::iter::Sum for RationalPoly {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(Self::zero(), |acc, p| &acc + &p)
    }
}

impl fmt::Display for RationalPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        let terms: Vec<String> = self
            .coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(k, c)| match k {
                0 => format!("{c}"),
                1 => format!("({c})*x"),
                _ => format!("({c})*x^{k}"),
            })
            .collect();
        f.write_str(&terms.join(" + "))
    }
}

/// Characteristic polynomial `det(lambda I - H)` by the continuant recursion
/// on polynomials.
pub fn charpoly(h: &RationalTridiag) -> RationalPoly {
    let mut prev = RationalPoly::one();
    let mut cur = RationalPoly::one();
    for (k, a) in h.diag().iter().enumerate() {
        let lin = RationalPoly::linear_root(a);
        let next = if k == 0 {
            lin
        } else {
            let b = &h.offdiag()[k - 1];
            &(&lin * &cur) - &prev.scale(&(b * b))
        };
        prev = std::mem::replace(&mut cur, next);
    }
    cur
}

/// `det(lambda I - A)` for a square dense matrix, interpolated from
/// fraction-free determinants at `n + 1` integer points.
pub fn dense_charpoly(a: &DenseMatrix<BigRational>) -> RationalPoly {
    let n = a.rows();
    RationalPoly::from_samples(n, |x| {
        let m = DenseMatrix::from_fn(n, n, |i, j| {
            let v = -a.get(i, j).clone();
            if i == j {
                v + x
            } else {
                v
            }
        });
        m.try_det().expect("square")
    })
}
