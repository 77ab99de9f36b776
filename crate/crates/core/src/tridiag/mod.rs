//! Symmetric tridiagonal matrices, contiguous principal minors, continuant
//! determinants and determinants of row/column-deleted minors.
//!
//! Indices in the public API are 1-based, matching the usual `(p, q)`
//! notation for principal minors `H^{p,q}` (rows and columns `p..=q`).
//! The degenerate ranges `(p, p - 1)` denote the empty matrix, whose
//! characteristic polynomial is the constant 1.

mod dense;

use std::fmt::Debug;
use std::ops::Neg;

use num_rational::BigRational;
use num_traits::{Num, Signed, ToPrimitive, Zero};
use serde::Serialize;
use thiserror::Error;

pub use dense::{dense_det, DenseMatrix};

/// Errors raised by the tridiagonal engine.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum TridiagError {
    #[error("a symmetric tridiagonal matrix needs at least one row")]
    Empty,
    #[error("off-diagonal has length {got}, expected {expected}")]
    Shape { expected: usize, got: usize },
    #[error("entry {index} is not finite")]
    NonFinite { index: usize },
    #[error("invalid minor range ({p}, {q}) for n = {n}")]
    Range { p: usize, q: usize, n: usize },
    #[error("index {index} outside 1..={n}")]
    Index { index: usize, n: usize },
    #[error("dense matrix is {rows}x{cols}, expected square")]
    NotSquare { rows: usize, cols: usize },
}

/// Scalar type usable as a matrix entry.
///
/// `f64` overrides the continuant with an overflow-safe rescaled variant;
/// exact rationals use the plain three-term recurrence.
pub trait Entry: Clone + Debug + Num + Neg<Output = Self> {
    fn is_valid_entry(&self) -> bool {
        true
    }

    /// Determinant of a square dense matrix.
    fn dense_det(m: &DenseMatrix<Self>) -> Self;

    /// `det(lambda I - T)` for the tridiagonal `T` given by `diag`/`offdiag`.
    fn continuant(diag: &[Self], offdiag: &[Self], lambda: &Self) -> Self {
        let mut prev = Self::one();
        let mut cur = Self::one();
        for (k, a) in diag.iter().enumerate() {
            let next = if k == 0 {
                lambda.clone() - a.clone()
            } else {
                let b = offdiag[k - 1].clone();
                (lambda.clone() - a.clone()) * cur.clone() - b.clone() * b * prev.clone()
            };
            prev = cur;
            cur = next;
        }
        cur
    }
}

impl Entry for f64 {
    fn is_valid_entry(&self) -> bool {
        self.is_finite()
    }

    fn dense_det(m: &DenseMatrix<f64>) -> f64 {
        dense::det_pivoted(m)
    }

    fn continuant(diag: &[f64], offdiag: &[f64], lambda: &f64) -> f64 {
        scaled_continuant(diag, offdiag, *lambda).to_f64()
    }
}

impl Entry for BigRational {
    fn dense_det(m: &DenseMatrix<BigRational>) -> BigRational {
        dense::det_fraction_free(m)
    }
}

/// A determinant carried as `mantissa * 2^exp2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaledDet {
    pub mantissa: f64,
    pub exp2: i32,
}

impl ScaledDet {
    pub fn to_f64(self) -> f64 {
        if self.exp2 == 0 {
            return self.mantissa;
        }
        // powi saturates to inf/0 which is the right boundary behaviour.
        self.mantissa * 2f64.powi(self.exp2)
    }
}

const RESCALE_ABOVE: f64 = 1e150;
const RESCALE_EXP: i32 = 498;

/// Three-term continuant with power-of-two rescaling of the running pair.
pub fn scaled_continuant(diag: &[f64], offdiag: &[f64], lambda: f64) -> ScaledDet {
    let mut prev = 1.0_f64;
    let mut cur = 1.0_f64;
    let mut exp2 = 0_i32;
    let down = 2f64.powi(-RESCALE_EXP);
    for (k, &a) in diag.iter().enumerate() {
        let next = if k == 0 {
            lambda - a
        } else {
            let b = offdiag[k - 1];
            (lambda - a) * cur - b * b * prev
        };
        prev = cur;
        cur = next;
        if cur.abs() > RESCALE_ABOVE || prev.abs() > RESCALE_ABOVE {
            cur *= down;
            prev *= down;
            exp2 += RESCALE_EXP;
        }
    }
    ScaledDet { mantissa: cur, exp2 }
}

/// Contiguous principal minor `(p, q)`, 1-based and inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct MinorRange {
    pub p: usize,
    pub q: usize,
}

impl MinorRange {
    pub const fn new(p: usize, q: usize) -> Self {
        Self { p, q }
    }

    pub const fn full(n: usize) -> Self {
        Self { p: 1, q: n }
    }

    /// Number of rows of the minor; zero for the empty ranges.
    pub fn len(&self) -> usize {
        (self.q + 1).saturating_sub(self.p)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn validate(&self, n: usize) -> Result<(), TridiagError> {
        if self.p < 1 || self.q > n || self.p > self.q + 1 {
            return Err(TridiagError::Range {
                p: self.p,
                q: self.q,
                n,
            });
        }
        Ok(())
    }
}

impl std::fmt::Display for MinorRange {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({},{})", self.p, self.q)
    }
}

/// Symmetric tridiagonal matrix stored as its diagonal `a_1..a_n` and
/// off-diagonal `b_1..b_{n-1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Tridiag<T> {
    diag: Vec<T>,
    offdiag: Vec<T>,
}

pub type SymTridiag = Tridiag<f64>;
pub type RationalTridiag = Tridiag<BigRational>;

impl<T: Entry> Tridiag<T> {
    pub fn new(diag: Vec<T>, offdiag: Vec<T>) -> Result<Self, TridiagError> {
        if diag.is_empty() {
            return Err(TridiagError::Empty);
        }
        if offdiag.len() + 1 != diag.len() {
            return Err(TridiagError::Shape {
                expected: diag.len() - 1,
                got: offdiag.len(),
            });
        }
        if let Some(index) = diag
            .iter()
            .chain(offdiag.iter())
            .position(|x| !x.is_valid_entry())
        {
            return Err(TridiagError::NonFinite { index });
        }
        Ok(Self { diag, offdiag })
    }

    /// The 0x0 matrix.
    pub fn empty() -> Self {
        Self {
            diag: Vec::new(),
            offdiag: Vec::new(),
        }
    }

    pub fn n(&self) -> usize {
        self.diag.len()
    }

    pub fn diag(&self) -> &[T] {
        &self.diag
    }

    pub fn offdiag(&self) -> &[T] {
        &self.offdiag
    }

    /// Entry `(i, j)`, 1-based.
    pub fn get(&self, i: usize, j: usize) -> T {
        if i == j {
            self.diag[i - 1].clone()
        } else if i + 1 == j || j + 1 == i {
            self.offdiag[i.min(j) - 1].clone()
        } else {
            T::zero()
        }
    }

    pub fn minor(&self, r: MinorRange) -> Result<Self, TridiagError> {
        r.validate(self.n())?;
        if r.is_empty() {
            return Ok(Self::empty());
        }
        Ok(Self {
            diag: self.diag[r.p - 1..r.q].to_vec(),
            offdiag: self.offdiag[r.p - 1..r.q - 1].to_vec(),
        })
    }

    pub fn to_dense(&self) -> DenseMatrix<T> {
        let n = self.n();
        DenseMatrix::from_fn(n, n, |i, j| self.get(i + 1, j + 1))
    }

    /// `lambda I - H` as a dense matrix.
    pub fn shifted_dense(&self, lambda: &T) -> DenseMatrix<T> {
        let n = self.n();
        DenseMatrix::from_fn(n, n, |i, j| {
            let h = self.get(i + 1, j + 1);
            if i == j {
                lambda.clone() - h
            } else {
                -h
            }
        })
    }

    /// `det(lambda I - H)`.
    pub fn charpoly_eval(&self, lambda: &T) -> T {
        T::continuant(&self.diag, &self.offdiag, lambda)
    }

    /// `f^{p,q}(lambda)`, the characteristic polynomial of the minor
    /// `(p, q)`; identically 1 on empty ranges.
    pub fn block_charpoly(&self, r: MinorRange, lambda: &T) -> Result<T, TridiagError> {
        r.validate(self.n())?;
        Ok(self.block_charpoly_unchecked(r.p, r.q, lambda))
    }

    fn block_charpoly_unchecked(&self, p: usize, q: usize, lambda: &T) -> T {
        if q < p {
            return T::one();
        }
        T::continuant(&self.diag[p - 1..q], &self.offdiag[p - 1..q - 1], lambda)
    }

    /// `(f_0, f_1, ..., f_n)` with `f_k = det(lambda I_k - H^{1,k})`.
    pub fn leading_continuants(&self, lambda: &T) -> Vec<T> {
        let mut out = Vec::with_capacity(self.n() + 1);
        out.push(T::one());
        for (k, a) in self.diag.iter().enumerate() {
            let next = if k == 0 {
                lambda.clone() - a.clone()
            } else {
                let b = self.offdiag[k - 1].clone();
                (lambda.clone() - a.clone()) * out[k].clone() - b.clone() * b * out[k - 1].clone()
            };
            out.push(next);
        }
        out
    }

    fn check_index(&self, index: usize) -> Result<(), TridiagError> {
        if index < 1 || index > self.n() {
            return Err(TridiagError::Index { index, n: self.n() });
        }
        Ok(())
    }

    /// `det((lambda I - H)_{k|l})`: row `k` and column `l` removed.
    ///
    /// Every position factors into block continuants and a product of
    /// off-diagonal entries.
    pub fn deleted_minor_det(&self, lambda: &T, k: usize, l: usize) -> Result<T, TridiagError> {
        self.check_index(k)?;
        self.check_index(l)?;
        let n = self.n();
        if k == l {
            return Ok(self.block_charpoly_unchecked(1, k - 1, lambda)
                * self.block_charpoly_unchecked(k + 1, n, lambda));
        }
        // Off the diagonal the minor is block triangular: a leading block,
        // a triangular run of -b_j, and a trailing block.
        let (m, r) = (k.min(l), k.max(l));
        let chain = self.offdiag[m - 1..r - 1]
            .iter()
            .fold(T::one(), |acc, b| acc * -b.clone());
        Ok(chain
            * self.block_charpoly_unchecked(1, m - 1, lambda)
            * self.block_charpoly_unchecked(r + 1, n, lambda))
    }

    /// Dense-elimination oracle for [`Self::deleted_minor_det`].
    pub fn deleted_minor_det_dense(&self, lambda: &T, k: usize, l: usize) -> Result<T, TridiagError> {
        self.check_index(k)?;
        self.check_index(l)?;
        let m = self.shifted_dense(lambda).delete(&[k - 1], &[l - 1]);
        Ok(T::dense_det(&m))
    }

    /// `det((lambda I - H)_{kl|kl})` for `k < l`: rows and columns `k` and
    /// `l` removed, which leaves three diagonal blocks.
    pub fn pair_deleted_minor_det(&self, lambda: &T, k: usize, l: usize) -> Result<T, TridiagError> {
        self.check_index(k)?;
        self.check_index(l)?;
        let (k, l) = (k.min(l), k.max(l));
        if k == l {
            return Err(TridiagError::Index {
                index: l,
                n: self.n(),
            });
        }
        Ok(self.block_charpoly_unchecked(1, k - 1, lambda)
            * self.block_charpoly_unchecked(k + 1, l - 1, lambda)
            * self.block_charpoly_unchecked(l + 1, self.n(), lambda))
    }
}

impl SymTridiag {
    /// Overflow-safe characteristic polynomial, mantissa and binary exponent.
    pub fn charpoly_eval_scaled(&self, lambda: f64) -> ScaledDet {
        scaled_continuant(&self.diag, &self.offdiag, lambda)
    }

    /// Gershgorin interval containing the spectrum.
    pub fn gershgorin(&self) -> (f64, f64) {
        let n = self.n();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let left = if i > 0 { self.offdiag[i - 1].abs() } else { 0.0 };
            let right = if i + 1 < n { self.offdiag[i].abs() } else { 0.0 };
            lo = lo.min(self.diag[i] - left - right);
            hi = hi.max(self.diag[i] + left + right);
        }
        (lo, hi)
    }

    /// Largest absolute entry, at least 1.
    pub fn scale(&self) -> f64 {
        self.diag
            .iter()
            .chain(self.offdiag.iter())
            .fold(1.0_f64, |m, x| m.max(x.abs()))
    }
}

impl RationalTridiag {
    /// Nearest floating-point matrix.
    pub fn to_f64(&self) -> SymTridiag {
        let conv = |v: &[BigRational]| v.iter().map(|x| x.to_f64().unwrap_or(f64::NAN)).collect();
        SymTridiag {
            diag: conv(&self.diag),
            offdiag: conv(&self.offdiag),
        }
    }

    /// True if every off-diagonal entry is nonzero.
    pub fn is_unreduced(&self) -> bool {
        self.offdiag.iter().all(|b| !b.is_zero())
    }

    pub fn max_abs(&self) -> BigRational {
        self.diag
            .iter()
            .chain(self.offdiag.iter())
            .map(|x| x.abs())
            .max()
            .unwrap_or_else(BigRational::zero)
    }
}
