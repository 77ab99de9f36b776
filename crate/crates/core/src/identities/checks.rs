use itertools::Itertools;
use num_rational::BigRational;
use num_traits::{One, Zero};

use super::poly::{charpoly, dense_charpoly, q, RationalPoly};
use super::{Counterexample, IdentityReport, Mode};
use crate::eig::{charpoly_derivs_by_minors, check_interlacing, default_gap_tol, eigenvalues};
use crate::tridiag::{DenseMatrix, MinorRange, RationalTridiag, SymTridiag};

fn sign(parity: usize) -> BigRational {
    if parity % 2 == 0 {
        BigRational::one()
    } else {
        -BigRational::one()
    }
}

fn det(m: &DenseMatrix<BigRational>) -> BigRational {
    m.try_det().expect("square")
}

/// `det((lambda I - H)` with 1-based `rows` and `cols` removed`)` as a
/// polynomial, interpolated from dense determinants.
fn shifted_minor_poly(h: &RationalTridiag, rows: &[usize], cols: &[usize]) -> RationalPoly {
    let r0: Vec<usize> = rows.iter().map(|k| k - 1).collect();
    let c0: Vec<usize> = cols.iter().map(|k| k - 1).collect();
    RationalPoly::from_samples(h.n() - rows.len(), |x| det(&h.shifted_dense(x).delete(&r0, &c0)))
}

fn shift_diag(h: &RationalTridiag, k: usize, d: i64) -> RationalTridiag {
    let mut diag = h.diag().to_vec();
    diag[k - 1] += q(d);
    RationalTridiag::new(diag, h.offdiag().to_vec()).expect("same shape")
}

fn shift_off(h: &RationalTridiag, k: usize, d: i64) -> RationalTridiag {
    let mut off = h.offdiag().to_vec();
    off[k - 1] += q(d);
    RationalTridiag::new(h.diag().to_vec(), off).expect("same shape")
}

fn single(name: &str, mode: Mode) -> IdentityReport {
    let mut r = IdentityReport::new(name, mode);
    r.instances = 1;
    r
}

fn finish(mut rep: IdentityReport, bad: Vec<String>, m: &DenseMatrix<BigRational>) -> IdentityReport {
    for b in bad {
        rep.fail(Counterexample::exact(b, m));
    }
    rep
}

/// Derivatives of `f(lambda) = det(lambda I - H)` in `lambda`, in each
/// diagonal entry `a_k` and in each off-diagonal entry `b_k`:
///
/// * `f' = sum_k det_{k|k}` and `f'' = 2 sum_{k<l} det_{kl|kl}`;
/// * `df/da_k = -det_{k|k}` and `d^2f/da_k^2 = 0`;
/// * `df/db_k = 2 det_{k|k+1} = -2 b_k det_{k,k+1|k,k+1}` and
///   `d^2f/db_k^2 = -2 det_{k,k+1|k,k+1}`,
///
/// where `det_{..|..}` are minors of `lambda I - H`. Parameter derivatives
/// are exact finite differences: `f` is affine in `a_k` and quadratic in
/// `b_k`.
pub fn check_charpoly_derivatives(h: &RationalTridiag) -> IdentityReport {
    let n = h.n();
    let rep = single("charpoly-derivatives", Mode::Exact);
    let mut bad = Vec::new();
    let f = charpoly(h);
    let dkk: Vec<RationalPoly> = (1..=n).map(|k| shifted_minor_poly(h, &[k], &[k])).collect();

    if f.derivative() != dkk.iter().cloned().sum() {
        bad.push("f' differs from the sum of diagonal-deleted minors".to_string());
    }
    let pairs: RationalPoly = (1..=n)
        .tuple_combinations()
        .map(|(k, l)| shifted_minor_poly(h, &[k, l], &[k, l]))
        .sum();
    if f.derivative().derivative() != pairs.scale(&q(2)) {
        bad.push("f'' differs from twice the sum of pair-deleted minors".to_string());
    }
    for k in 1..=n {
        let up = charpoly(&shift_diag(h, k, 1));
        let down = charpoly(&shift_diag(h, k, -1));
        if &up - &f != -&dkk[k - 1] {
            bad.push(format!("df/da_{k} differs from -det_{{{k}|{k}}}"));
        }
        if !(&(&up - &f) - &(&f - &down)).is_zero() {
            bad.push(format!("f is not affine in a_{k}"));
        }
    }
    for k in 1..n {
        let b = &h.offdiag()[k - 1];
        let up = charpoly(&shift_off(h, k, 1));
        let down = charpoly(&shift_off(h, k, -1));
        let half = BigRational::new(1.into(), 2.into());
        let fb = (&up - &down).scale(&half);
        let fbb = &(&up - &f) - &(&f - &down);
        let dk = shifted_minor_poly(h, &[k], &[k + 1]);
        let pair = shifted_minor_poly(h, &[k, k + 1], &[k, k + 1]);
        if fb != dk.scale(&q(2)) {
            bad.push(format!("df/db_{k} differs from 2 det_{{{k}|{}}}", k + 1));
        }
        if fb != pair.scale(&(b * q(-2))) {
            bad.push(format!(
                "df/db_{k} differs from -2 b_{k} det of the pair-deleted minor"
            ));
        }
        if fbb != pair.scale(&q(-2)) {
            bad.push(format!(
                "d2f/db_{k}^2 differs from -2 det of the pair-deleted minor"
            ));
        }
    }
    finish(rep, bad, &h.to_dense())
}

/// For symmetric `A`: `d det A / d a_kk = det A_{k|k}` and, moving the
/// symmetric pair `a_kl = a_lk` together, `d det A / d a_kl =
/// (-1)^{k+l} 2 det A_{k|l}`. The determinant is affine in `a_kk` and
/// quadratic along the pair, so one- and two-sided differences are exact.
pub fn check_cofactor_derivative(a: &DenseMatrix<BigRational>) -> IdentityReport {
    let n = a.rows();
    let rep = single("cofactor-derivative", Mode::Exact);
    let mut bad = Vec::new();
    let d = det(a);
    for k in 0..n {
        let mut up = a.clone();
        up.set(k, k, a.get(k, k) + q(1));
        if det(&up) - &d != det(&a.delete(&[k], &[k])) {
            bad.push(format!("diagonal derivative at ({0},{0})", k + 1));
        }
    }
    for (k, l) in (0..n).tuple_combinations() {
        let bump = |t: i64| {
            let mut m = a.clone();
            m.set(k, l, a.get(k, l) + q(t));
            m.set(l, k, a.get(l, k) + q(t));
            det(&m)
        };
        let deriv = (bump(1) - bump(-1)) / q(2);
        let expect = sign(k + l) * q(2) * det(&a.delete(&[k], &[l]));
        if deriv != expect {
            bad.push(format!("off-diagonal derivative at ({},{})", k + 1, l + 1));
        }
    }
    finish(rep, bad, a)
}

fn zeroed(a: &DenseMatrix<BigRational>, entries: &[(usize, usize)]) -> DenseMatrix<BigRational> {
    let mut m = a.clone();
    for &(i, j) in entries {
        m.set(i - 1, j - 1, BigRational::zero());
    }
    m
}

/// Tridiagonal `A` (1-based `k0` in `2..=n-1`). With `a_{k0,k0-1} =
/// a_{k0,k0} = a_{k0+1,k0} = 0` the determinant vanishes. With only the
/// first two zeros it need not; such instances are kept as scope
/// counterexamples rather than failures.
pub fn check_zero_pattern_scope(a: &DenseMatrix<BigRational>, k0: usize) -> IdentityReport {
    let n = a.rows();
    let mut rep = single("zero-pattern-scope", Mode::Exact);
    assert!(k0 >= 2 && k0 < n, "k0 = {k0} outside 2..={}", n - 1);
    let strong = zeroed(a, &[(k0, k0 - 1), (k0, k0), (k0 + 1, k0)]);
    if !det(&strong).is_zero() {
        rep.fail(Counterexample::exact(
            format!("nonzero determinant under the three-zero pattern at k0 = {k0}"),
            &strong,
        ));
    }
    let literal = zeroed(a, &[(k0, k0 - 1), (k0, k0)]);
    let dl = det(&literal);
    if !dl.is_zero() {
        rep.scope_counterexamples.push(Counterexample::exact(
            format!("two-zero pattern at k0 = {k0} gives det = {dl}"),
            &literal,
        ));
    }
    rep
}

/// The fixed 3x3 instance `[[1,1,0],[0,0,1],[0,1,2]]`, which has
/// `a_21 = a_22 = 0` and determinant `-1`, together with its three-zero
/// variant whose determinant is 0. Counts as no random instance.
pub fn literal_zero_pattern_counterexample() -> IdentityReport {
    let m = |rows: [[i64; 3]; 3]| {
        DenseMatrix::from_rows(rows.iter().map(|r| r.iter().map(|&x| q(x)).collect()).collect())
    };
    let literal = m([[1, 1, 0], [0, 0, 1], [0, 1, 2]]);
    let strong = m([[1, 1, 0], [0, 0, 1], [0, 0, 2]]);
    let mut rep = IdentityReport::new("zero-pattern-scope", Mode::Exact);
    let dl = det(&literal);
    if !dl.is_zero() {
        rep.scope_counterexamples.push(Counterexample::exact(
            format!("two-zero pattern at k0 = 2 gives det = {dl}"),
            &literal,
        ));
    }
    if !det(&strong).is_zero() {
        rep.fail(Counterexample::exact("fixed three-zero instance", &strong));
    }
    rep.notes.push(
        "zeros at (k0,k0-1) and (k0,k0) alone do not force det = 0; (k0+1,k0) = 0 is also needed".to_string(),
    );
    rep
}

/// `det((lambda I - H)_{k|k+1}) = -b_k det((lambda I - H)_{k,k+1|k,k+1})`
/// as polynomials, for every `k`.
pub fn check_offdiag_deleted_minor(h: &RationalTridiag) -> IdentityReport {
    let n = h.n();
    let rep = single("offdiag-deleted-minor", Mode::Exact);
    let mut bad = Vec::new();
    for k in 1..n {
        let lhs = shifted_minor_poly(h, &[k], &[k + 1]);
        let lead = charpoly(&h.minor(MinorRange::new(1, k - 1)).expect("valid range"));
        let trail = charpoly(&h.minor(MinorRange::new(k + 2, n)).expect("valid range"));
        let rhs = (&lead * &trail).scale(&-h.offdiag()[k - 1].clone());
        if lhs != rhs {
            bad.push(format!("k = {k}"));
        }
    }
    finish(rep, bad, &h.to_dense())
}

/// With the diagonal parametrized as `sqrt(2) x_k` and the off-diagonal as
/// `y_k`, gradient and Laplacian taken in `(x, y)`:
/// `f'^2 - grad f . grad f / 2 = -f lap f + 2 sum_{l-k>1} det_{k|k} det_{l|l}`.
/// In `a_k = sqrt(2) x_k` this reads `(df/dx_k)^2 = 2 (df/da_k)^2` and
/// `d^2f/dx_k^2 = 2 d^2f/da_k^2`, which keeps everything rational.
pub fn check_gradient_identity(h: &RationalTridiag) -> IdentityReport {
    let n = h.n();
    let rep = single("gradient-identity", Mode::Exact);
    let f = charpoly(h);
    let two = q(2);
    let half = BigRational::new(1.into(), 2.into());
    let mut grad2 = RationalPoly::zero();
    let mut lap = RationalPoly::zero();
    for k in 1..=n {
        let up = charpoly(&shift_diag(h, k, 1));
        let down = charpoly(&shift_diag(h, k, -1));
        let fa = &up - &f;
        let faa = &(&up - &f) - &(&f - &down);
        grad2 = &grad2 + &(&fa * &fa).scale(&two);
        lap = &lap + &faa.scale(&two);
    }
    for k in 1..n {
        let up = charpoly(&shift_off(h, k, 1));
        let down = charpoly(&shift_off(h, k, -1));
        let fb = (&up - &down).scale(&half);
        let fbb = &(&up - &f) - &(&f - &down);
        grad2 = &grad2 + &(&fb * &fb);
        lap = &lap + &fbb;
    }
    let fl = f.derivative();
    let lhs = &(&fl * &fl) - &grad2.scale(&half);
    let dkk: Vec<RationalPoly> = (1..=n).map(|k| shifted_minor_poly(h, &[k], &[k])).collect();
    let mut cross = RationalPoly::zero();
    for k in 1..=n {
        for l in (k + 2)..=n {
            cross = &cross + &(&dkk[k - 1] * &dkk[l - 1]);
        }
    }
    let rhs = &(-&(&f * &lap)) + &cross.scale(&two);
    let bad = if lhs != rhs {
        vec![format!("lhs {lhs} differs from rhs {rhs}")]
    } else {
        Vec::new()
    };
    finish(rep, bad, &h.to_dense())
}

/// The coefficient of `lambda^{n-k}` in `det(lambda I - A)` is `(-1)^k`
/// times the sum of the `k x k` principal minors of `A` (equivalently, the
/// `k`-th elementary symmetric function of the eigenvalues).
pub fn check_principal_minor_sums(a: &DenseMatrix<BigRational>) -> IdentityReport {
    let n = a.rows();
    let rep = single("principal-minor-sums", Mode::Exact);
    let p = dense_charpoly(a);
    let mut bad = Vec::new();
    if p.coeff(n) != BigRational::one() {
        bad.push("characteristic polynomial is not monic".to_string());
    }
    for k in 1..=n {
        let s: BigRational = (0..n)
            .combinations(k)
            .map(|idx| det(&a.select(&idx, &idx)))
            .fold(BigRational::zero(), |acc, x| acc + x);
        if p.coeff(n - k) != sign(k) * s {
            bad.push(format!("coefficient of lambda^{}", n - k));
        }
    }
    finish(rep, bad, a)
}

/// Expanding `det A` along row `k` and then each resulting minor along row
/// `l` (`k < l`) gives an expression in the entries of rows `k`, `l` and the
/// minors `det A_{kl|pq}`; checked for every pair `k < l`.
pub fn check_twice_cofactor(a: &DenseMatrix<BigRational>) -> IdentityReport {
    let n = a.rows();
    let rep = single("twice-cofactor", Mode::Exact);
    let d = det(a);
    let e = |i: usize, j: usize| a.get(i, j).clone();
    let m = |p: usize, qq: usize, k: usize, l: usize| det(&a.delete(&[k, l], &[p, qq]));
    let mut bad = Vec::new();
    // Index parities are the same 0- or 1-based since every sign below has
    // an even number of index terms or a fixed offset.
    for (k, l) in (0..n).tuple_combinations() {
        let others = || (0..n).filter(move |&x| x != k && x != l);
        let mut s = e(k, k) * det(&a.delete(&[k], &[k]));
        s -= e(k, l) * e(l, k) * m(l, k, k, l);
        for qq in others() {
            let sg = if qq < l { sign(k + qq + 1) } else { sign(k + qq) };
            s += sg * e(k, l) * e(l, qq) * m(l, qq, k, l);
        }
        for p in others() {
            let sg = if p > k { sign(l + p + 1) } else { sign(l + p) };
            s += sg * e(k, p) * e(l, k) * m(p, k, k, l);
        }
        for p in others() {
            for qq in (0..n).filter(|&x| x != k && x != p) {
                let sg = if p > qq {
                    sign(k + l + p + qq + 1)
                } else {
                    sign(k + l + p + qq)
                };
                s += sg * e(k, p) * e(l, qq) * m(p, qq, k, l);
            }
        }
        if s != d {
            bad.push(format!("rows ({}, {})", k + 1, l + 1));
        }
    }
    finish(rep, bad, a)
}

/// `det C[alpha, beta] = sum_gamma det A[alpha, gamma] det B[gamma, beta]`
/// for `C = AB` and every pair of equal-size index sets.
pub fn check_cauchy_binet(a: &DenseMatrix<BigRational>, b: &DenseMatrix<BigRational>) -> IdentityReport {
    let rep = single("cauchy-binet", Mode::Exact);
    let c = a.mul(b);
    let (m, k, n) = (a.rows(), a.cols(), b.cols());
    let mut bad = Vec::new();
    for r in 1..=m.min(k).min(n) {
        for alpha in (0..m).combinations(r) {
            for beta in (0..n).combinations(r) {
                let lhs = det(&c.select(&alpha, &beta));
                let rhs = (0..k)
                    .combinations(r)
                    .map(|g| det(&a.select(&alpha, &g)) * det(&b.select(&g, &beta)))
                    .fold(BigRational::zero(), |acc, x| acc + x);
                if lhs != rhs {
                    bad.push(format!("rows {alpha:?}, cols {beta:?}"));
                }
            }
        }
    }
    let mut rep = finish(rep, bad, a);
    if !rep.passed() {
        rep.notes.push(format!(
            "second factor: {:?}",
            Counterexample::exact("B", b).matrix
        ));
    }
    rep
}

/// `|A| |A_{ij|kl}| = |A_{i|k}| |A_{j|l}| - |A_{i|l}| |A_{j|k}|` for all
/// `i < j`, `k < l`.
pub fn check_sylvester(a: &DenseMatrix<BigRational>) -> IdentityReport {
    let n = a.rows();
    let rep = single("sylvester", Mode::Exact);
    let d = det(a);
    let mut bad = Vec::new();
    let m1 = |i: usize, k: usize| det(&a.delete(&[i], &[k]));
    for (i, j) in (0..n).tuple_combinations() {
        for (k, l) in (0..n).tuple_combinations() {
            let lhs = &d * det(&a.delete(&[i, j], &[k, l]));
            let rhs = m1(i, k) * m1(j, l) - m1(i, l) * m1(j, k);
            if lhs != rhs {
                bad.push(format!("(i,j,k,l) = ({},{},{},{})", i + 1, j + 1, k + 1, l + 1));
            }
        }
    }
    finish(rep, bad, a)
}

/// At each computed eigenvalue, `f''(lambda_i) / f'(lambda_i) =
/// 2 sum_{j != i} 1 / (lambda_i - lambda_j)`, with `f'` and `f''` taken
/// from minor sums. The tolerance is relative to the size of the terms.
pub fn check_root_ratio(h: &SymTridiag, rel: f64) -> IdentityReport {
    let mut rep = single("root-ratio", Mode::Float);
    let spec = match eigenvalues(h, 1e-14 * h.scale().max(1.0)) {
        Ok(s) => s,
        Err(e) => {
            rep.fail(Counterexample::float(e.to_string(), &h.to_dense()));
            return rep;
        }
    };
    let v = spec.values();
    for (i, &li) in v.iter().enumerate() {
        let d = charpoly_derivs_by_minors(h, li);
        let lhs = d.d2 / d.d1;
        let terms: Vec<f64> = (0..v.len())
            .filter(|&j| j != i)
            .map(|j| 2.0 / (li - v[j]))
            .collect();
        let rhs: f64 = terms.iter().sum();
        let size: f64 = terms.iter().map(|t| t.abs()).sum();
        if !((lhs - rhs).abs() <= rel * size.max(f64::MIN_POSITIVE)) {
            rep.fail(Counterexample::float(
                format!("i = {}: ratio {lhs:e} vs sum {rhs:e}", i + 1),
                &h.to_dense(),
            ));
        }
    }
    rep
}

/// With every off-diagonal nonzero, the eigenvalues of the leading and of
/// the trailing `(n-1)`-minor strictly interlace those of `H`.
pub fn check_strict_interlacing(h: &SymTridiag) -> IdentityReport {
    let mut rep = single("strict-interlacing", Mode::Float);
    let n = h.n();
    if h.offdiag().contains(&0.0) {
        rep.instances = 0;
        rep.notes
            .push("skipped instances with a zero off-diagonal".to_string());
        return rep;
    }
    let tol = 1e-14 * h.scale().max(1.0);
    let outer = eigenvalues(h, tol).expect("positive tolerance");
    for r in [MinorRange::new(1, n - 1), MinorRange::new(2, n)] {
        let inner = eigenvalues(&h.minor(r).expect("valid range"), tol).expect("positive tolerance");
        let res =
            check_interlacing(&outer, &inner, true, default_gap_tol(&outer)).expect("sizes differ by one");
        if !res.holds {
            rep.fail(Counterexample::float(
                format!("minor {r}: margin {:e}", res.min_margin),
                &h.to_dense(),
            ));
        }
    }
    rep
}
