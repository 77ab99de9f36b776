//! Drift, diffusion coefficients, quadratic-variation rates and the
//! difference-product identity at one time, all written in terms of
//! `f^{p,q}(lambda) = prod_r (lambda - lambda_r^{p,q})` for leading and
//! trailing minors.

use std::f64::consts::SQRT_2;

use serde::Serialize;

use super::{DysonError, SpectralState, COLLISION_FLOOR_REL};

/// Below this fraction of the spectral diameter a minor root is treated as
/// coincident with `lambda_i` when differentiating `F^{k,l}`.
const LOG_DERIVATIVE_SEPARATION_REL: f64 = 1e-8;

/// Shared per-`(time, i)` evaluation of every minor characteristic
/// polynomial at `lambda_i`.
struct Context<'a> {
    st: &'a SpectralState,
    lam: f64,
    /// `prod_{j != i} (lambda_i - lambda_j)`.
    prod: f64,
    /// `sum_{j != i} 1 / (lambda_i - lambda_j)`.
    inv_sum: f64,
    /// `lead[m] = f^{1,m}(lambda_i)`, `m = 0..=n`.
    lead: Vec<f64>,
    /// `trail[m] = f^{m,n}(lambda_i)`, `m = 0..=n+1` (slot 0 unused).
    trail: Vec<f64>,
    diameter: f64,
}

fn poly_at(roots: &[f64], lam: f64) -> f64 {
    roots.iter().map(|r| lam - r).product()
}

fn diameter(values: &[f64]) -> f64 {
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if values.len() < 2 {
        0.0
    } else {
        hi - lo
    }
}

impl<'a> Context<'a> {
    fn new(st: &'a SpectralState, i: usize) -> Result<Self, DysonError> {
        let n = st.n();
        if i >= n {
            return Err(DysonError::Index { index: i, n });
        }
        let full = st.full();
        let lam = full[i];
        let diameter = diameter(full);
        let floor = COLLISION_FLOOR_REL * diameter.max(f64::MIN_POSITIVE);
        let mut prod = 1.0;
        let mut inv_sum = 0.0;
        for (j, &mu) in full.iter().enumerate() {
            if j == i {
                continue;
            }
            let d = lam - mu;
            if !(d.abs() > floor) {
                return Err(DysonError::Collision { gap: d.abs(), floor });
            }
            prod *= d;
            inv_sum += 1.0 / d;
        }
        let lead = (0..=n).map(|m| poly_at(st.leading_roots(m), lam)).collect();
        let trail = (0..=n + 1)
            .map(|m| {
                if m == 0 {
                    1.0
                } else {
                    poly_at(st.trailing_roots(m), lam)
                }
            })
            .collect();
        Ok(Self {
            st,
            lam,
            prod,
            inv_sum,
            lead,
            trail,
            diameter,
        })
    }

    fn n(&self) -> usize {
        self.st.n()
    }

    /// `F^{k,l}(lambda_i)` for `l - k > 1`, 1-based.
    fn f_kl(&self, k: usize, l: usize) -> f64 {
        self.lead[k - 1] * self.trail[k + 1] * self.lead[l - 1] * self.trail[l + 1]
    }

    fn f_sum(&self) -> f64 {
        let n = self.n();
        let mut s = 0.0;
        for k in 1..=n {
            for l in (k + 2)..=n {
                s += self.f_kl(k, l);
            }
        }
        s
    }

    /// `d/dlambda F^{k,l}` at `lambda_i`.
    fn f_kl_derivative(&self, k: usize, l: usize) -> f64 {
        let st = self.st;
        let roots: Vec<f64> = st
            .leading_roots(k - 1)
            .iter()
            .chain(st.trailing_roots(k + 1))
            .chain(st.leading_roots(l - 1))
            .chain(st.trailing_roots(l + 1))
            .copied()
            .collect();
        let delta = LOG_DERIVATIVE_SEPARATION_REL * self.diameter;
        let diffs: Vec<f64> = roots.iter().map(|r| self.lam - r).collect();
        if diffs.iter().all(|d| d.abs() > delta) {
            return self.f_kl(k, l) * diffs.iter().map(|d| 1.0 / d).sum::<f64>();
        }
        // Product rule term by term; exact when a factor vanishes.
        (0..diffs.len())
            .map(|r| {
                diffs
                    .iter()
                    .enumerate()
                    .filter(|&(s, _)| s != r)
                    .map(|(_, d)| d)
                    .product::<f64>()
            })
            .sum()
    }

    fn drift(&self, alpha: &[f64]) -> f64 {
        let n = self.n();
        let p = self.prod;
        let mut bessel_term = 0.0;
        for k in 1..n {
            bessel_term += (alpha[k - 1] - 2.0) * self.lead[k - 1] * self.trail[k + 2];
        }
        let mut f_sum = 0.0;
        let mut df_sum = 0.0;
        for k in 1..=n {
            for l in (k + 2)..=n {
                f_sum += self.f_kl(k, l);
                df_sum += self.f_kl_derivative(k, l);
            }
        }
        2.0 * self.inv_sum + bessel_term / p + 2.0 / (p * p) * (2.0 * self.inv_sum * f_sum - df_sum)
    }

    fn coeffs(&self) -> DiffusionCoeffs {
        let n = self.n();
        let x = self.st.bessel_values();
        let diag = (1..=n)
            .map(|k| SQRT_2 * self.lead[k - 1] * self.trail[k + 1] / self.prod)
            .collect();
        let off = (1..n)
            .map(|k| 2.0 * x[k - 1] * self.lead[k - 1] * self.trail[k + 2] / self.prod)
            .collect();
        DiffusionCoeffs { diag, off }
    }
}

/// Coefficients of `dB_k` (`diag`, length `n`) and `dB_{k,k+1}` (`off`,
/// length `n - 1`) in the equation for one eigenvalue.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiffusionCoeffs {
    pub diag: Vec<f64>,
    pub off: Vec<f64>,
}

impl DiffusionCoeffs {
    /// Both families divided by `sqrt(2)`: the quantities
    /// `f f / prod` and `sqrt(2) X_k f f / prod`, each bounded by 1.
    pub fn normalized(&self) -> Self {
        Self {
            diag: self.diag.iter().map(|c| c / SQRT_2).collect(),
            off: self.off.iter().map(|c| c / SQRT_2).collect(),
        }
    }

    pub fn sum_of_squares(&self) -> f64 {
        self.diag.iter().chain(&self.off).map(|c| c * c).sum()
    }

    /// `sum_k c_k c'_k` over both families.
    pub fn dot(&self, other: &Self) -> f64 {
        self.diag
            .iter()
            .zip(&other.diag)
            .chain(self.off.iter().zip(&other.off))
            .map(|(a, b)| a * b)
            .sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.diag.iter().chain(&self.off).fold(0.0, |m, c| m.max(c.abs()))
    }
}

/// Drift and martingale coefficients for one eigenvalue.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SdeTerms {
    pub drift: f64,
    pub coeffs: DiffusionCoeffs,
}

fn check_alpha(st: &SpectralState, alpha: &[f64]) -> Result<(), DysonError> {
    if alpha.len() + 1 != st.n() {
        return Err(DysonError::Domain(format!(
            "alpha has {} entries, expected {}",
            alpha.len(),
            st.n() - 1
        )));
    }
    Ok(())
}

/// `F^{k,l}(lambda) = f^{1,k-1} f^{k+1,n} f^{1,l-1} f^{l+1,n}` at `lambda`,
/// with 1-based `k`, `l` and `l - k > 1`.
pub fn f_kl(st: &SpectralState, k: usize, l: usize, lambda: f64) -> Result<f64, DysonError> {
    let n = st.n();
    if k < 1 || l > n || l <= k + 1 {
        return Err(DysonError::Domain(format!(
            "F^{{k,l}} needs 1 <= k, l <= {n} and l - k > 1, got ({k}, {l})"
        )));
    }
    Ok(poly_at(st.leading_roots(k - 1), lambda)
        * poly_at(st.trailing_roots(k + 1), lambda)
        * poly_at(st.leading_roots(l - 1), lambda)
        * poly_at(st.trailing_roots(l + 1), lambda))
}

/// `sum_{l-k>1} F^{k,l}(lambda_i)`; zero when `n < 3`.
pub fn f_sum_at(st: &SpectralState, i: usize) -> Result<f64, DysonError> {
    Ok(Context::new(st, i)?.f_sum())
}

/// `2 sum F^{k,l}(lambda_i) / prod_{j != i} (lambda_i - lambda_j)^2`, which
/// lies in `[0, 1]`.
pub fn f_fraction_at(st: &SpectralState, i: usize) -> Result<f64, DysonError> {
    let c = Context::new(st, i)?;
    Ok(2.0 * c.f_sum() / (c.prod * c.prod))
}

/// Full `dt` coefficient in the equation for `lambda_i` (0-based `i`).
pub fn drift_at(st: &SpectralState, alpha: &[f64], i: usize) -> Result<f64, DysonError> {
    check_alpha(st, alpha)?;
    Ok(Context::new(st, i)?.drift(alpha))
}

pub fn diffusion_coeffs_at(st: &SpectralState, i: usize) -> Result<DiffusionCoeffs, DysonError> {
    Ok(Context::new(st, i)?.coeffs())
}

/// Drift and diffusion coefficients from one shared evaluation.
pub fn sde_terms_at(st: &SpectralState, alpha: &[f64], i: usize) -> Result<SdeTerms, DysonError> {
    check_alpha(st, alpha)?;
    let c = Context::new(st, i)?;
    Ok(SdeTerms {
        drift: c.drift(alpha),
        coeffs: c.coeffs(),
    })
}

/// `d<lambda_i, lambda_j>_t / dt`, 0-based indices. The cross rate uses
/// determinants of `lambda I - H` with one row and one column removed.
pub fn qv_rate_at(st: &SpectralState, i: usize, j: usize) -> Result<f64, DysonError> {
    let ci = Context::new(st, i)?;
    if i == j {
        return Ok(2.0 * (1.0 - 2.0 * ci.f_sum() / (ci.prod * ci.prod)));
    }
    let cj = Context::new(st, j)?;
    let h = st.matrix();
    let n = st.n();
    let mut s = 0.0;
    for k in 1..=n {
        for l in (k + 2)..=n {
            s += h.deleted_minor_det(&ci.lam, k, l)? * h.deleted_minor_det(&cj.lam, l, k)?;
        }
    }
    Ok(-4.0 * s / (ci.prod * cj.prod))
}

/// `|LHS - RHS| / max(1, |LHS|)` for the identity expressing
/// `prod_{j != i} (lambda_i - lambda_j)^2` through minor polynomials.
pub fn iden_residual_at(st: &SpectralState, i: usize) -> Result<f64, DysonError> {
    let n = st.n();
    if i >= n {
        return Err(DysonError::Index { index: i, n });
    }
    // No gap check here: the identity is polynomial and holds at collisions.
    let lam = st.full()[i];
    let lhs: f64 = st
        .full()
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != i)
        .map(|(_, mu)| (lam - mu) * (lam - mu))
        .product();
    let lead: Vec<f64> = (0..=n).map(|m| poly_at(st.leading_roots(m), lam)).collect();
    let trail: Vec<f64> = (0..=n + 1)
        .map(|m| {
            if m == 0 {
                1.0
            } else {
                poly_at(st.trailing_roots(m), lam)
            }
        })
        .collect();
    let x = st.bessel_values();
    let mut rhs = 0.0;
    for k in 1..=n {
        rhs += (lead[k - 1] * trail[k + 1]).powi(2);
    }
    for k in 1..n {
        rhs += 2.0 * x[k - 1] * x[k - 1] * (lead[k - 1] * trail[k + 2]).powi(2);
    }
    for k in 1..=n {
        for l in (k + 2)..=n {
            rhs += 2.0 * lead[k - 1] * trail[k + 1] * lead[l - 1] * trail[l + 1];
        }
    }
    Ok((lhs - rhs).abs() / lhs.abs().max(1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eig::eigenvalues;
    use crate::tridiag::{MinorRange, SymTridiag};

    fn state(diag: &[f64], off: &[f64]) -> SpectralState {
        let h = SymTridiag::new(diag.to_vec(), off.to_vec()).unwrap();
        SpectralState::from_matrix(&h, 1e-15).unwrap()
    }

    fn close(a: f64, b: f64, rel: f64) -> bool {
        (a - b).abs() <= rel * a.abs().max(b.abs()).max(1.0)
    }

    #[test]
    fn two_by_two_examples() {
        let st = state(&[0.0, 0.0], &[1.0]);
        assert!(close(drift_at(&st, &[3.0], 0).unwrap(), -1.5, 1e-12));
        assert!(close(drift_at(&st, &[2.0], 0).unwrap(), 2.0 / (-2.0), 1e-12));
        let c = diffusion_coeffs_at(&st, 0).unwrap();
        assert!(close(c.diag[0], SQRT_2 / 2.0, 1e-12));
        assert!(close(c.sum_of_squares(), 2.0, 1e-12));
        assert!(close(qv_rate_at(&st, 0, 0).unwrap(), 2.0, 1e-12));
        assert_eq!(qv_rate_at(&st, 0, 1).unwrap(), 0.0);
        assert!(iden_residual_at(&st, 0).unwrap() < 1e-14);
        assert_eq!(f_sum_at(&st, 0).unwrap(), 0.0);
        assert!(f_kl(&st, 1, 2, 0.0).is_err());
    }

    #[test]
    fn one_by_one_identity() {
        let st = state(&[0.7], &[]);
        assert_eq!(iden_residual_at(&st, 0).unwrap(), 0.0);
        assert_eq!(qv_rate_at(&st, 0, 0).unwrap(), 2.0);
    }

    #[test]
    fn three_by_three_f_matches_explicit_product() {
        let h = SymTridiag::new(vec![0.2, -0.5, 1.1], vec![0.8, 1.3]).unwrap();
        let st = SpectralState::from_matrix(&h, 1e-15).unwrap();
        let s23 = eigenvalues(&h.minor(MinorRange::new(2, 3)).unwrap(), 1e-15).unwrap();
        let s12 = eigenvalues(&h.minor(MinorRange::new(1, 2)).unwrap(), 1e-15).unwrap();
        for &lam in st.full() {
            let expect = s23.values().iter().chain(s12.values()).map(|r| lam - r).product();
            assert!(close(f_kl(&st, 1, 3, lam).unwrap(), expect, 1e-13));
            assert!(f_kl(&st, 1, 3, lam).unwrap() >= -1e-12);
        }
    }

    /// Drift written out for n = 3 term by term.
    fn explicit_drift_n3(h: &SymTridiag, alpha: [f64; 2], i: usize) -> f64 {
        let eig = |p, q| {
            eigenvalues(&h.minor(MinorRange::new(p, q)).unwrap(), 1e-15)
                .unwrap()
                .values()
                .to_vec()
        };
        let full = eig(1, 3);
        let l11 = eig(1, 1)[0];
        let l33 = eig(3, 3)[0];
        let l12 = eig(1, 2);
        let l23 = eig(2, 3);
        let li = full[i];
        let prod: f64 = (0..3).filter(|&j| j != i).map(|j| li - full[j]).product();
        let inv: f64 = (0..3).filter(|&j| j != i).map(|j| 1.0 / (li - full[j])).sum();
        let (a, b, c, d) = (li - l23[0], li - l23[1], li - l12[0], li - l12[1]);
        2.0 * inv
            + ((alpha[0] - 2.0) * (li - l33) + (alpha[1] - 2.0) * (li - l11)) / prod
            + 2.0 / (prod * prod)
                * (2.0 * inv * a * b * c * d - b * c * d - a * c * d - a * b * d - a * b * c)
    }

    #[test]
    fn generic_drift_matches_explicit_three_by_three() {
        let h = SymTridiag::new(vec![0.2, -0.5, 1.1], vec![0.8, 1.3]).unwrap();
        let st = SpectralState::from_matrix(&h, 1e-15).unwrap();
        for i in 0..3 {
            let a = drift_at(&st, &[3.0, 2.5], i).unwrap();
            let b = explicit_drift_n3(&h, [3.0, 2.5], i);
            assert!(close(a, b, 1e-10), "{a} vs {b}");
        }
    }

    fn eig_i(diag: &[f64], off: &[f64], i: usize) -> f64 {
        let h = SymTridiag::new(diag.to_vec(), off.to_vec()).unwrap();
        eigenvalues(&h, 1e-16).unwrap().values()[i]
    }

    /// Ito generator of the matrix diffusion applied to `lambda_i(H)`:
    /// `sum_k d^2/da_k^2 + sum_k (1/2 d^2/db_k^2 + (alpha_k - 1)/(2 b_k) d/db_k)`,
    /// by central differences.
    fn generator_drift(diag: &[f64], off: &[f64], alpha: &[f64], i: usize) -> f64 {
        let h = 1e-3;
        let mut total = 0.0;
        let base = eig_i(diag, off, i);
        for k in 0..diag.len() {
            let mut p = diag.to_vec();
            let mut m = diag.to_vec();
            p[k] += h;
            m[k] -= h;
            total += (eig_i(&p, off, i) - 2.0 * base + eig_i(&m, off, i)) / (h * h);
        }
        for k in 0..off.len() {
            let mut p = off.to_vec();
            let mut m = off.to_vec();
            p[k] += h;
            m[k] -= h;
            let (ep, em) = (eig_i(diag, &p, i), eig_i(diag, &m, i));
            total += 0.5 * (ep - 2.0 * base + em) / (h * h);
            total += (alpha[k] - 1.0) / (2.0 * off[k]) * (ep - em) / (2.0 * h);
        }
        total
    }

    #[test]
    fn drift_matches_ito_generator() {
        let cases: &[(&[f64], &[f64], &[f64])] = &[
            (&[0.2, -0.5, 1.1], &[0.8, 1.3], &[3.0, 2.5]),
            (&[0.0, 0.4, -0.3, 0.9], &[1.0, 0.6, 1.2], &[2.0, 2.0, 4.0]),
            (
                &[1.0, -1.0, 0.5, 0.0, 2.0],
                &[0.9, 1.4, 0.7, 1.1],
                &[1.5, 2.0, 3.0, 2.5],
            ),
        ];
        for (diag, off, alpha) in cases {
            let st = state(diag, off);
            for i in 0..diag.len() {
                let a = drift_at(&st, alpha, i).unwrap();
                let b = generator_drift(diag, off, alpha, i);
                assert!((a - b).abs() < 1e-4 * b.abs().max(1.0), "i={i}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn coefficients_are_eigenvalue_gradients() {
        // sqrt(2) d lambda / d a_k and d lambda / d b_k
        let (diag, off) = ([0.0, 0.4, -0.3, 0.9], [1.0, 0.6, 1.2]);
        let st = state(&diag, &off);
        let h = 1e-5;
        for i in 0..4 {
            let c = diffusion_coeffs_at(&st, i).unwrap();
            for k in 0..4 {
                let (mut p, mut m) = (diag.to_vec(), diag.to_vec());
                p[k] += h;
                m[k] -= h;
                let g = (eig_i(&p, &off, i) - eig_i(&m, &off, i)) / (2.0 * h);
                assert!((c.diag[k] - SQRT_2 * g).abs() < 1e-7);
            }
            for k in 0..3 {
                let (mut p, mut m) = (off.to_vec(), off.to_vec());
                p[k] += h;
                m[k] -= h;
                let g = (eig_i(&diag, &p, i) - eig_i(&diag, &m, i)) / (2.0 * h);
                assert!((c.off[k] - g).abs() < 1e-7);
            }
        }
    }

    #[test]
    fn qv_rates_agree_with_coefficient_products() {
        let st = state(&[1.0, -1.0, 0.5, 0.0, 2.0], &[0.9, 1.4, 0.7, 1.1]);
        let coeffs: Vec<_> = (0..5).map(|i| diffusion_coeffs_at(&st, i).unwrap()).collect();
        for i in 0..5 {
            for j in 0..5 {
                let q = qv_rate_at(&st, i, j).unwrap();
                let d = coeffs[i].dot(&coeffs[j]);
                assert!((q - d).abs() < 1e-9 * d.abs().max(1.0), "({i},{j}) {q} vs {d}");
                if i == j {
                    assert!((0.0..=2.0 + 1e-12).contains(&q));
                }
            }
            assert!(iden_residual_at(&st, i).unwrap() < 1e-12);
            let frac = f_fraction_at(&st, i).unwrap();
            assert!((-1e-12..=1.0 + 1e-12).contains(&frac));
            assert!(coeffs[i].normalized().max_abs() < 1.0 + 1e-12);
        }
    }

    #[test]
    fn derivative_fallback_agrees_with_log_form() {
        // lambda_2 = 0 is also the root of the (1,1) and (3,3) minors, so
        // the product-rule branch is taken.
        let st = state(&[0.0, 0.0, 0.0], &[1.0, 1.0]);
        let a = drift_at(&st, &[2.0, 2.0], 1).unwrap();
        let b = generator_drift(&[0.0, 0.0, 0.0], &[1.0, 1.0], &[2.0, 2.0], 1);
        assert!((a - b).abs() < 1e-4, "{a} vs {b}");
        let c = Context::new(&st, 1).unwrap();
        let d = c.f_kl_derivative(1, 3);
        // F^{1,3} = f^{2,3}(l) f^{1,2}(l) = (l^2 - 1)^2, derivative 0 at 0
        assert!(d.abs() < 1e-12);
    }

    #[test]
    fn collided_spectrum_is_an_error() {
        let st = state(&[1.0, 1.0, 3.0], &[0.0, 1.0]);
        let st = st.with_full(vec![1.0, 1.0, 5.0]).unwrap();
        assert!(matches!(
            drift_at(&st, &[2.0, 2.0], 0),
            Err(DysonError::Collision { .. })
        ));
        assert!(drift_at(&st, &[2.0], 0).is_err());
        assert!(matches!(qv_rate_at(&st, 3, 0), Err(DysonError::Index { .. })));
    }
}
