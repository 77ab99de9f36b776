//! Randomized certification of the determinant identities behind the
//! eigenvalue SDE. Polynomial identities in `lambda` are compared
//! coefficient by coefficient over exact rationals; the few statements that
//! need eigenvalues are checked in floating point.

mod checks;
mod poly;

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::tridiag::{DenseMatrix, RationalTridiag, SymTridiag};

pub use checks::{
    check_cauchy_binet, check_charpoly_derivatives, check_cofactor_derivative, check_gradient_identity,
    check_offdiag_deleted_minor, check_principal_minor_sums, check_root_ratio, check_strict_interlacing,
    check_sylvester, check_twice_cofactor, check_zero_pattern_scope, literal_zero_pattern_counterexample,
};
pub use poly::{charpoly, dense_charpoly, RationalPoly};

/// How many failing instances a report keeps verbatim.
const MAX_RECORDED: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Exact,
    Float,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Counterexample {
    pub description: String,
    /// Row-major entries rendered as `p/q` strings (or decimals in float mode).
    pub matrix: Vec<Vec<String>>,
}

impl Counterexample {
    pub fn exact(description: impl Into<String>, m: &DenseMatrix<BigRational>) -> Self {
        Self {
            description: description.into(),
            matrix: (0..m.rows())
                .map(|i| (0..m.cols()).map(|j| m.get(i, j).to_string()).collect())
                .collect(),
        }
    }

    pub fn float(description: impl Into<String>, m: &DenseMatrix<f64>) -> Self {
        Self {
            description: description.into(),
            matrix: (0..m.rows())
                .map(|i| (0..m.cols()).map(|j| format!("{:e}", m.get(i, j))).collect())
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentityReport {
    pub name: String,
    pub mode: Mode,
    pub instances: usize,
    pub failure_count: usize,
    /// The first few failures.
    pub failures: Vec<Counterexample>,
    /// Instances showing that a weaker hypothesis does not suffice; these
    /// are expected, not failures.
    pub scope_counterexamples: Vec<Counterexample>,
    pub notes: Vec<String>,
}

impl IdentityReport {
    pub fn new(name: impl Into<String>, mode: Mode) -> Self {
        Self {
            name: name.into(),
            mode,
            instances: 0,
            failure_count: 0,
            failures: Vec::new(),
            scope_counterexamples: Vec::new(),
            notes: Vec::new(),
        }
    }

    pub fn passed(&self) -> bool {
        self.failure_count == 0
    }

    pub(crate) fn fail(&mut self, c: Counterexample) {
        self.failure_count += 1;
        if self.failures.len() < MAX_RECORDED {
            self.failures.push(c);
        }
    }

    /// Adds the counts and records of `other` (same identity) into `self`.
    pub fn absorb(&mut self, other: IdentityReport) {
        self.instances += other.instances;
        self.failure_count += other.failure_count;
        for f in other.failures {
            if self.failures.len() < MAX_RECORDED {
                self.failures.push(f);
            }
        }
        for c in other.scope_counterexamples {
            if self.scope_counterexamples.len() < MAX_RECORDED {
                self.scope_counterexamples.push(c);
            }
        }
        for n in other.notes {
            if !self.notes.contains(&n) {
                self.notes.push(n);
            }
        }
    }
}

/// Numerator in `[-20, 20]`, denominator in `[1, 10]`.
pub fn random_rational<R: Rng + ?Sized>(rng: &mut R) -> BigRational {
    BigRational::new(
        BigInt::from(rng.random_range(-20i64..=20)),
        BigInt::from(rng.random_range(1i64..=10)),
    )
}

pub fn random_tridiag<R: Rng + ?Sized>(rng: &mut R, n: usize) -> RationalTridiag {
    let diag = (0..n).map(|_| random_rational(rng)).collect();
    let off = (1..n).map(|_| random_rational(rng)).collect();
    RationalTridiag::new(diag, off).expect("consistent shape")
}

pub fn random_dense<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> DenseMatrix<BigRational> {
    DenseMatrix::from_fn(rows, cols, |_, _| random_rational(rng))
}

pub fn random_symmetric<R: Rng + ?Sized>(rng: &mut R, n: usize) -> DenseMatrix<BigRational> {
    let mut m = random_dense(rng, n, n);
    for i in 0..n {
        for j in 0..i {
            let v = m.get(j, i).clone();
            m.set(i, j, v);
        }
    }
    m
}

/// A tridiagonal but not necessarily symmetric dense matrix.
pub fn random_general_tridiag<R: Rng + ?Sized>(rng: &mut R, n: usize) -> DenseMatrix<BigRational> {
    DenseMatrix::from_fn(n, n, |i, j| {
        if i.abs_diff(j) <= 1 {
            random_rational(rng)
        } else {
            BigRational::from_integer(BigInt::from(0))
        }
    })
}

/// Float tridiagonal with entries in `[-10, 10]` and off-diagonal
/// magnitudes at least `0.1`.
pub fn random_float_tridiag<R: Rng + ?Sized>(rng: &mut R, n: usize) -> SymTridiag {
    let diag = (0..n).map(|_| rng.random_range(-10.0..=10.0)).collect();
    let off = (1..n)
        .map(|_| {
            let m: f64 = rng.random_range(0.1..=10.0);
            if rng.random_bool(0.5) {
                m
            } else {
                -m
            }
        })
        .collect();
    SymTridiag::new(diag, off).expect("consistent shape")
}

/// Runs every exact check on `instances` random inputs each. Sizes are drawn
/// from `2..=max_size` (at least 3 where the statement needs it); the
/// Cauchy-Binet factors are capped at 5.
pub fn run_exact_suite(seed: u64, instances: usize, max_size: usize) -> Vec<IdentityReport> {
    let max_size = max_size.max(3);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();

    let mut run = |name: &str, f: &mut dyn FnMut(&mut ChaCha8Rng) -> IdentityReport| {
        let mut total = IdentityReport::new(name, Mode::Exact);
        for _ in 0..instances {
            total.absorb(f(&mut rng));
        }
        out.push(total);
    };

    run("charpoly-derivatives", &mut |r| {
        let n = r.random_range(2..=max_size);
        check_charpoly_derivatives(&random_tridiag(r, n))
    });
    run("cofactor-derivative", &mut |r| {
        let n = r.random_range(2..=max_size);
        check_cofactor_derivative(&random_symmetric(r, n))
    });
    let mut first = true;
    run("zero-pattern-scope", &mut |r| {
        let n = r.random_range(3..=max_size);
        let k0 = r.random_range(2..n);
        let mut rep = check_zero_pattern_scope(&random_general_tridiag(r, n), k0);
        if std::mem::take(&mut first) {
            rep.absorb(literal_zero_pattern_counterexample());
        }
        rep
    });
    run("offdiag-deleted-minor", &mut |r| {
        let n = r.random_range(2..=max_size.max(8));
        check_offdiag_deleted_minor(&random_tridiag(r, n))
    });
    run("gradient-identity", &mut |r| {
        let n = r.random_range(2..=max_size);
        check_gradient_identity(&random_tridiag(r, n))
    });
    run("principal-minor-sums", &mut |r| {
        let n = r.random_range(1..=max_size);
        check_principal_minor_sums(&random_dense(r, n, n))
    });
    run("twice-cofactor", &mut |r| {
        let n = r.random_range(2..=max_size);
        check_twice_cofactor(&random_symmetric(r, n))
    });
    run("cauchy-binet", &mut |r| {
        let (m, k, n) = (
            r.random_range(1..=5),
            r.random_range(1..=5),
            r.random_range(1..=5),
        );
        check_cauchy_binet(&random_dense(r, m, k), &random_dense(r, k, n))
    });
    run("sylvester", &mut |r| {
        let n = r.random_range(2..=max_size.min(6));
        check_sylvester(&random_dense(r, n, n))
    });
    out
}

/// Floating-point checks at computed eigenvalues.
pub fn run_float_suite(seed: u64, instances: usize, max_size: usize) -> Vec<IdentityReport> {
    let max_size = max_size.max(2);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut ratio = IdentityReport::new("root-ratio", Mode::Float);
    let mut inter = IdentityReport::new("strict-interlacing", Mode::Float);
    for _ in 0..instances {
        let n = rng.random_range(2..=max_size);
        let h = random_float_tridiag(&mut rng, n);
        ratio.absorb(check_root_ratio(&h, 1e-8));
        inter.absorb(check_strict_interlacing(&h));
    }
    vec![ratio, inter]
}
