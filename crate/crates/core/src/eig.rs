//! Symmetric tridiagonal eigenvalues by Sturm-sequence bisection, derivatives
//! of the characteristic polynomial, and interlacing checks between a matrix
//! and its one-row-smaller principal minors.

use serde::Serialize;
use thiserror::Error;

use crate::tridiag::SymTridiag;

/// Hard cap on bisection steps per eigenvalue.
pub const MAX_BISECTION_STEPS: usize = 200;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EigError {
    #[error("tolerance must be positive and finite, got {0}")]
    BadTolerance(f64),
    #[error("eigenvalue {index} did not converge after {steps} bisection steps (width {width:e})")]
    NonConvergence { index: usize, steps: usize, width: f64 },
    #[error("inner spectrum has {inner} values, expected {expected}")]
    SizeMismatch { expected: usize, inner: usize },
}

/// Eigenvalues in ascending order together with the absolute tolerance
/// they were computed to.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Spectrum {
    values: Vec<f64>,
    tol: f64,
}

impl Spectrum {
    /// Sorts `values`; `tol` is recorded as given.
    pub fn from_values(mut values: Vec<f64>, tol: f64) -> Self {
        values.sort_by(f64::total_cmp);
        Self { values, tol }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `lambda_max - lambda_min`, zero for fewer than two values.
    pub fn diameter(&self) -> f64 {
        match (self.values.first(), self.values.last()) {
            (Some(a), Some(b)) => b - a,
            _ => 0.0,
        }
    }

    /// Smallest gap between consecutive eigenvalues; `+inf` below two values.
    pub fn min_gap(&self) -> f64 {
        self.values
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(f64::INFINITY, f64::min)
    }
}

/// Number of eigenvalues of `h` strictly below `lambda`.
///
/// Runs the ratio form `d_k = (a_k - lambda) - b_{k-1}^2 / d_{k-1}` of the
/// continuant sequence and counts negative pivots. A pivot that is exactly
/// zero corresponds to a vanishing continuant, which is read as a negative
/// continuant sign (so the count is the one at `lambda - 0`).
pub fn sturm_count(h: &SymTridiag, lambda: f64) -> usize {
    let diag = h.diag();
    let off = h.offdiag();
    let max_b2 = off.iter().fold(1.0_f64, |m, b| m.max(b * b));
    let pivmin = f64::MIN_POSITIVE * max_b2;
    let mut count = 0;
    let mut d = 1.0_f64;
    for (k, &a) in diag.iter().enumerate() {
        d = if k == 0 {
            a - lambda
        } else {
            (a - lambda) - off[k - 1] * off[k - 1] / d
        };
        if d < 0.0 {
            count += 1;
        }
        if d.abs() < pivmin {
            d = if d < 0.0 { -pivmin } else { pivmin };
        }
    }
    count
}

/// All eigenvalues by bisection on Gershgorin brackets, each to within
/// `tol` (or to machine resolution, whichever is coarser).
pub fn eigenvalues(h: &SymTridiag, tol: f64) -> Result<Spectrum, EigError> {
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(EigError::BadTolerance(tol));
    }
    let n = h.n();
    if n == 0 {
        return Ok(Spectrum::from_values(Vec::new(), tol));
    }
    if n == 1 {
        return Ok(Spectrum::from_values(vec![h.diag()[0]], tol));
    }
    let (glo, ghi) = h.gershgorin();
    let pad = 2.0 * tol + 4.0 * f64::EPSILON * glo.abs().max(ghi.abs()).max(1.0);
    // lo[k] always has count <= k and hi[k] has count >= k + 1; every probe
    // tightens the brackets of all eigenvalues it separates.
    let mut lo = vec![glo - pad; n];
    let mut hi = vec![ghi + pad; n];
    let mut values = Vec::with_capacity(n);
    for k in 0..n {
        if k > 0 {
            lo[k] = lo[k].max(lo[k - 1]);
        }
        let mut steps = 0;
        loop {
            let (a, b) = (lo[k], hi[k]);
            if b - a < tol {
                break;
            }
            let mid = a + 0.5 * (b - a);
            if mid <= a || mid >= b {
                break;
            }
            if steps == MAX_BISECTION_STEPS {
                return Err(EigError::NonConvergence {
                    index: k,
                    steps,
                    width: b - a,
                });
            }
            steps += 1;
            let c = sturm_count(h, mid);
            for j in k..n {
                if j < c {
                    hi[j] = hi[j].min(mid);
                } else {
                    lo[j] = lo[j].max(mid);
                }
            }
        }
        values.push(lo[k] + 0.5 * (hi[k] - lo[k]));
    }
    Ok(Spectrum::from_values(values, tol))
}

/// `(f, f', f'')` of a characteristic polynomial at a point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CharpolyDerivs {
    pub f: f64,
    pub d1: f64,
    pub d2: f64,
}

/// Derivatives of `f(lambda) = prod_j (lambda - lambda_j)` from the roots.
///
/// Each derivative is written as a sum of products so it stays exact at a
/// root: `f' = sum_j prod_{m != j}` and `f'' = 2 sum_{j<m} prod_{r != j,m}`.
pub fn charpoly_derivs_at(eigs: &[f64], lambda: f64) -> CharpolyDerivs {
    let n = eigs.len();
    let diffs: Vec<f64> = eigs.iter().map(|&e| lambda - e).collect();
    let f = diffs.iter().product();
    let mut d1 = 0.0;
    let mut d2 = 0.0;
    for j in 0..n {
        d1 += (0..n).filter(|&m| m != j).map(|m| diffs[m]).product::<f64>();
        for m in (j + 1)..n {
            d2 += 2.0
                * (0..n)
                    .filter(|&r| r != j && r != m)
                    .map(|r| diffs[r])
                    .product::<f64>();
        }
    }
    CharpolyDerivs { f, d1, d2 }
}

/// The same derivatives through principal-minor determinants:
/// `f' = sum_k det((lambda I - H)_{k|k})` and
/// `f'' = 2 sum_{k<l} det((lambda I - H)_{kl|kl})`.
pub fn charpoly_derivs_by_minors(h: &SymTridiag, lambda: f64) -> CharpolyDerivs {
    let n = h.n();
    let f = h.charpoly_eval(&lambda);
    let mut d1 = 0.0;
    let mut d2 = 0.0;
    for k in 1..=n {
        d1 += h.deleted_minor_det(&lambda, k, k).expect("index in range");
        for l in (k + 1)..=n {
            d2 += 2.0 * h.pair_deleted_minor_det(&lambda, k, l).expect("index in range");
        }
    }
    CharpolyDerivs { f, d1, d2 }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InterlacingReport {
    pub holds: bool,
    pub strict: bool,
    /// `min_k min(eta_k - lambda_k, lambda_{k+1} - eta_k)`.
    pub min_margin: f64,
    /// 0-based index into `inner` of the first violated pair.
    pub first_violation: Option<usize>,
}

/// Default strictness margin: `1e-12` times the spectral diameter.
pub fn default_gap_tol(outer: &Spectrum) -> f64 {
    1e-12 * outer.diameter().max(f64::MIN_POSITIVE)
}

/// Checks `lambda_k <= eta_k <= lambda_{k+1}` for every `k`, or the strict
/// version with margin `gap_tol` when `strict` is set.
pub fn check_interlacing(
    outer: &Spectrum,
    inner: &Spectrum,
    strict: bool,
    gap_tol: f64,
) -> Result<InterlacingReport, EigError> {
    if outer.len() != inner.len() + 1 {
        return Err(EigError::SizeMismatch {
            expected: outer.len().saturating_sub(1),
            inner: inner.len(),
        });
    }
    let lam = outer.values();
    let mut min_margin = f64::INFINITY;
    let mut first_violation = None;
    for (k, &eta) in inner.values().iter().enumerate() {
        let margin = (eta - lam[k]).min(lam[k + 1] - eta);
        min_margin = min_margin.min(margin);
        let ok = if strict { margin > gap_tol } else { margin >= 0.0 };
        if !ok && first_violation.is_none() {
            first_violation = Some(k);
        }
    }
    Ok(InterlacingReport {
        holds: first_violation.is_none(),
        strict,
        min_margin,
        first_violation,
    })
}
