//! Small dense matrices and their determinants. These are the oracles for
//! every tridiagonal fast path, so they favour obviousness over speed.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::{Entry, TridiagError};

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Entry> DenseMatrix<T> {
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    /// Panics if the rows are ragged.
    pub fn from_rows(rows: Vec<Vec<T>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        Self {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |i, j| if i == j { T::one() } else { T::zero() })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    /// Entry `(i, j)`, 0-based.
    pub fn get(&self, i: usize, j: usize) -> &T {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: T) {
        self.data[i * self.cols + j] = v;
    }

    /// Submatrix on the given (0-based, ascending) row and column indices.
    pub fn select(&self, rows: &[usize], cols: &[usize]) -> Self {
        Self::from_fn(rows.len(), cols.len(), |i, j| self.get(rows[i], cols[j]).clone())
    }

    /// Matrix with the given 0-based rows and columns removed.
    pub fn delete(&self, rows: &[usize], cols: &[usize]) -> Self {
        let keep_r: Vec<usize> = (0..self.rows).filter(|i| !rows.contains(i)).collect();
        let keep_c: Vec<usize> = (0..self.cols).filter(|j| !cols.contains(j)).collect();
        self.select(&keep_r, &keep_c)
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i).clone())
    }

    /// Panics on a dimension mismatch.
    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "dimension mismatch in product");
        Self::from_fn(self.rows, other.cols, |i, j| {
            (0..self.cols).fold(T::zero(), |acc, k| {
                acc + self.get(i, k).clone() * other.get(k, j).clone()
            })
        })
    }

    pub fn try_det(&self) -> Result<T, TridiagError> {
        if !self.is_square() {
            return Err(TridiagError::NotSquare {
                rows: self.rows,
                cols: self.cols,
            });
        }
        Ok(T::dense_det(self))
    }
}

/// Determinant of a square matrix; the 0x0 determinant is 1.
///
/// Panics if `m` is not square.
pub fn dense_det<T: Entry>(m: &DenseMatrix<T>) -> T {
    m.try_det().expect("determinant of a non-square matrix")
}

/// Gaussian elimination with partial pivoting.
pub(crate) fn det_pivoted(m: &DenseMatrix<f64>) -> f64 {
    let n = m.rows;
    let mut a = m.data.clone();
    let mut det = 1.0;
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&x, &y| a[x * n + col].abs().total_cmp(&a[y * n + col].abs()))
            .expect("non-empty pivot range");
        if a[pivot * n + col] == 0.0 {
            return 0.0;
        }
        if pivot != col {
            for j in 0..n {
                a.swap(pivot * n + j, col * n + j);
            }
            det = -det;
        }
        let p = a[col * n + col];
        det *= p;
        for i in (col + 1)..n {
            let factor = a[i * n + col] / p;
            if factor != 0.0 {
                for j in col..n {
                    a[i * n + j] -= factor * a[col * n + j];
                }
            }
        }
    }
    det
}

/// Exact determinant: clear each row's denominators, then run Bareiss
/// fraction-free elimination over the integers.
pub(crate) fn det_fraction_free(m: &DenseMatrix<BigRational>) -> BigRational {
    let n = m.rows;
    if n == 0 {
        return BigRational::one();
    }
    let mut scale = BigInt::one();
    let mut a: Vec<BigInt> = Vec::with_capacity(n * n);
    for i in 0..n {
        let row = &m.data[i * n..(i + 1) * n];
        let lcm = row.iter().fold(BigInt::one(), |l, x| l.lcm(x.denom()));
        for x in row {
            a.push(x.numer() * (&lcm / x.denom()));
        }
        scale *= lcm;
    }

    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..n.saturating_sub(1) {
        if a[k * n + k].is_zero() {
            match ((k + 1)..n).find(|&i| !a[i * n + k].is_zero()) {
                Some(i) => {
                    for j in 0..n {
                        a.swap(i * n + j, k * n + j);
                    }
                    sign = -sign;
                }
                None => return BigRational::zero(),
            }
        }
        for i in (k + 1)..n {
            for j in (k + 1)..n {
                let v = &a[i * n + j] * &a[k * n + k] - &a[i * n + k] * &a[k * n + j];
                a[i * n + j] = v / &prev;
            }
        }
        prev = a[k * n + k].clone();
    }
    let det = sign * a[n * n - 1].clone();
    let out = BigRational::new(det, scale);
    debug_assert!(out.denom().is_positive());
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64) -> BigRational {
        BigRational::from_integer(BigInt::from(n))
    }

    fn qm(rows: &[&[i64]]) -> DenseMatrix<BigRational> {
        DenseMatrix::from_rows(rows.iter().map(|r| r.iter().map(|&x| q(x)).collect()).collect())
    }

    fn fm(rows: &[&[f64]]) -> DenseMatrix<f64> {
        DenseMatrix::from_rows(rows.iter().map(|r| r.to_vec()).collect())
    }

    #[test]
    fn identity_and_small_cases() {
        assert_eq!(dense_det(&DenseMatrix::<f64>::identity(3)), 1.0);
        assert_eq!(dense_det(&DenseMatrix::<BigRational>::identity(3)), q(1));
        assert_eq!(dense_det(&DenseMatrix::<f64>::identity(0)), 1.0);
        assert_eq!(dense_det(&fm(&[&[0.0, 3.0], &[3.0, 0.0]])), -9.0);
    }

    #[test]
    fn hand_expanded_three_by_three() {
        let rows: &[&[i64]] = &[&[1, 1, 0], &[0, 0, 1], &[0, 1, 2]];
        assert_eq!(dense_det(&qm(rows)), q(-1));
        let f = fm(&[&[1.0, 1.0, 0.0], &[0.0, 0.0, 1.0], &[0.0, 1.0, 2.0]]);
        assert!((dense_det(&f) + 1.0).abs() < 1e-15);
    }

    #[test]
    fn fraction_free_handles_denominators_and_pivots() {
        let half = BigRational::new(BigInt::from(1), BigInt::from(2));
        let third = BigRational::new(BigInt::from(1), BigInt::from(3));
        // [[0, 1/2], [1/3, 5]] -> -1/6
        let m = DenseMatrix::from_rows(vec![vec![q(0), half], vec![third, q(5)]]);
        assert_eq!(dense_det(&m), BigRational::new(BigInt::from(-1), BigInt::from(6)));
        // singular
        assert_eq!(dense_det(&qm(&[&[1, 2], &[2, 4]])), q(0));
        assert_eq!(dense_det(&qm(&[&[0, 0], &[0, 4]])), q(0));
    }

    #[test]
    fn non_square_is_an_error() {
        let m = qm(&[&[1, 2, 3]]);
        assert!(matches!(
            m.try_det(),
            Err(TridiagError::NotSquare { rows: 1, cols: 3 })
        ));
    }

    #[test]
    fn delete_and_select() {
        let m = qm(&[&[1, 2, 3], &[4, 5, 6], &[7, 8, 9]]);
        assert_eq!(m.delete(&[1], &[0]), qm(&[&[2, 3], &[8, 9]]));
        assert_eq!(m.select(&[0, 2], &[2]), qm(&[&[3], &[9]]));
        assert_eq!(m.transpose().get(0, 2), &q(7));
        assert_eq!(m.mul(&DenseMatrix::identity(3)), m);
    }
}
