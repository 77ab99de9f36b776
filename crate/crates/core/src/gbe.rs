//! Gaussian beta ensemble in tridiagonal form, moment checks, and the
//! comparison with the matrix process at time 1.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, Normal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dyson::{simulate_entries, DysonError};
use crate::sde::{Scheme, SdeConfig};
use crate::tridiag::SymTridiag;

/// Standard errors allowed for the trace-moment check.
pub const TRACE_Z: f64 = 3.0;
/// Standard errors allowed per entry moment in [`time_slice_check`].
pub const SLICE_Z: f64 = 4.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GbeError {
    #[error("invalid ensemble config: {0}")]
    Config(String),
    #[error(transparent)]
    Dyson(#[from] DysonError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GbeConfig {
    pub n: usize,
    pub beta: f64,
    pub samples: usize,
    pub seed: u64,
}

impl GbeConfig {
    pub fn validate(&self) -> Result<(), GbeError> {
        if self.n == 0 {
            return Err(GbeError::Config("n must be at least 1".into()));
        }
        if !(self.beta > 0.0 && self.beta.is_finite()) {
            return Err(GbeError::Config(format!("beta = {} must be positive", self.beta)));
        }
        if self.samples == 0 {
            return Err(GbeError::Config("samples must be at least 1".into()));
        }
        Ok(())
    }
}

/// Sample `index` of the ensemble: diagonal `g_i / sqrt(beta)` with
/// `g_i ~ N(0, 2)`, off-diagonal `k` equal to `chi_{(n-k) beta} / sqrt(beta)`
/// drawn as the square root of a Gamma(`(n-k) beta / 2`, 2) variate.
pub fn sample_gbe(config: &GbeConfig, index: u64) -> Result<SymTridiag, GbeError> {
    config.validate()?;
    let n = config.n;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(index);
    let sb = config.beta.sqrt();
    let normal = Normal::new(0.0, std::f64::consts::SQRT_2).expect("valid normal");
    let diag = (0..n).map(|_| normal.sample(&mut rng) / sb).collect();
    let off = (1..n)
        .map(|k| {
            let shape = (n - k) as f64 * config.beta / 2.0;
            let g = Gamma::new(shape, 2.0).expect("positive shape");
            g.sample(&mut rng).sqrt() / sb
        })
        .collect();
    Ok(SymTridiag::new(diag, off).expect("consistent shape"))
}

/// Sample mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub mean: f64,
    pub std_error: f64,
    pub count: usize,
}

impl Estimate {
    pub fn from_values(xs: &[f64]) -> Self {
        let m = xs.len();
        let mean = xs.iter().sum::<f64>() / m as f64;
        let std_error = if m > 1 {
            let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (m - 1) as f64;
            (var / m as f64).sqrt()
        } else {
            f64::INFINITY
        };
        Self {
            mean,
            std_error,
            count: m,
        }
    }

    /// `|mean - target|` in standard errors.
    pub fn z_against(&self, target: f64) -> f64 {
        z_score(self.mean - target, self.std_error)
    }

    /// Two-sample z score of the difference in means.
    pub fn z_between(&self, other: &Estimate) -> f64 {
        z_score(self.mean - other.mean, self.std_error.hypot(other.std_error))
    }
}

fn z_score(d: f64, se: f64) -> f64 {
    if se > 0.0 {
        d.abs() / se
    } else if d == 0.0 {
        0.0
    } else {
        f64::INFINITY
    }
}

/// `E[tr H^2] = 2n / beta + n(n - 1)`: each diagonal entry contributes
/// `2 / beta` and each off-diagonal pair `2 (n-k) beta / beta`.
pub fn expected_trace_square(n: usize, beta: f64) -> f64 {
    let n = n as f64;
    2.0 * n / beta + n * (n - 1.0)
}

pub fn trace_square(h: &SymTridiag) -> f64 {
    h.diag().iter().map(|a| a * a).sum::<f64>() + 2.0 * h.offdiag().iter().map(|b| b * b).sum::<f64>()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceMomentReport {
    pub n: usize,
    pub beta: f64,
    pub expected: f64,
    pub estimate: Estimate,
    pub z: f64,
    pub passed: bool,
}

pub fn trace_moment_check(config: &GbeConfig) -> Result<TraceMomentReport, GbeError> {
    config.validate()?;
    let xs = (0..config.samples as u64)
        .map(|i| sample_gbe(config, i).map(|h| trace_square(&h)))
        .collect::<Result<Vec<_>, _>>()?;
    let estimate = Estimate::from_values(&xs);
    let expected = expected_trace_square(config.n, config.beta);
    let z = estimate.z_against(expected);
    Ok(TraceMomentReport {
        n: config.n,
        beta: config.beta,
        expected,
        estimate,
        z,
        passed: z <= TRACE_Z,
    })
}

/// Where a compared entry sits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Entry {
    /// Diagonal entry `k` (1-based).
    Diag(usize),
    /// Off-diagonal entry `(k, k+1)`.
    Off(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EntryMoment {
    pub entry: Entry,
    /// 1 for the mean, 2 for the second moment.
    pub moment: u32,
    pub process: Estimate,
    pub ensemble: Estimate,
    /// Closed-form value: 0, `2 / beta`, `E[chi]` or `(n-k)` as applicable.
    pub exact: f64,
    pub z: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TimeSliceReport {
    pub n: usize,
    pub beta: f64,
    pub samples: usize,
    pub alpha: Vec<f64>,
    pub comparisons: Vec<EntryMoment>,
    pub passed: bool,
}

/// `E[chi_m] = sqrt(2) Gamma((m+1)/2) / Gamma(m/2)`.
fn chi_mean(m: f64) -> f64 {
    std::f64::consts::SQRT_2 * (libm::lgamma((m + 1.0) / 2.0) - libm::lgamma(m / 2.0)).exp()
}

/// Compares the first two moments of every entry of
/// `(H(1) - H(0)) / sqrt(beta)`, simulated from `x0 = 0` with
/// `alpha = ((n-1) beta, ..., beta)` and the exact Bessel transition, with
/// the same moments of the ensemble. Each comparison is a two-sample z test
/// at [`SLICE_Z`].
pub fn time_slice_check(n: usize, beta: f64, samples: usize, seed: u64) -> Result<TimeSliceReport, GbeError> {
    let gcfg = GbeConfig {
        n,
        beta,
        samples,
        seed: seed.wrapping_add(1),
    };
    gcfg.validate()?;
    let alpha: Vec<f64> = (1..n).map(|k| (n - k) as f64 * beta).collect();
    let mut scfg = SdeConfig::new(alpha.clone(), vec![0.0; n - 1], 1.0, 1.0, seed);
    scfg.scheme = Scheme::ExactSquaredBessel;

    let sb = beta.sqrt();
    let entries: Vec<Entry> = (1..=n).map(Entry::Diag).chain((1..n).map(Entry::Off)).collect();
    let value = |h: &SymTridiag, e: Entry| match e {
        Entry::Diag(k) => h.diag()[k - 1],
        Entry::Off(k) => h.offdiag()[k - 1],
    };
    let mut proc_vals = vec![Vec::with_capacity(samples); entries.len()];
    let mut ens_vals = vec![Vec::with_capacity(samples); entries.len()];
    for i in 0..samples as u64 {
        let path = simulate_entries(&scfg, i)?;
        let (h0, h1) = (&path.matrices[0], path.matrices.last().expect("nonempty path"));
        let g = sample_gbe(&gcfg, i)?;
        for (slot, &e) in entries.iter().enumerate() {
            proc_vals[slot].push((value(h1, e) - value(h0, e)) / sb);
            ens_vals[slot].push(value(&g, e));
        }
    }

    let mut comparisons = Vec::new();
    for (slot, &e) in entries.iter().enumerate() {
        for moment in [1u32, 2] {
            let pw = |v: &Vec<f64>| v.iter().map(|x| x.powi(moment as i32)).collect::<Vec<_>>();
            let process = Estimate::from_values(&pw(&proc_vals[slot]));
            let ensemble = Estimate::from_values(&pw(&ens_vals[slot]));
            let exact = match (e, moment) {
                (Entry::Diag(_), 1) => 0.0,
                (Entry::Diag(_), _) => 2.0 / beta,
                (Entry::Off(k), 1) => chi_mean((n - k) as f64 * beta) / sb,
                (Entry::Off(k), _) => (n - k) as f64,
            };
            let z = process.z_between(&ensemble);
            comparisons.push(EntryMoment {
                entry: e,
                moment,
                process,
                ensemble,
                exact,
                z,
                passed: z <= SLICE_Z,
            });
        }
    }
    let passed = comparisons.iter().all(|c| c.passed);
    Ok(TimeSliceReport {
        n,
        beta,
        samples,
        alpha,
        comparisons,
        passed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(n: usize, beta: f64, samples: usize) -> GbeConfig {
        GbeConfig {
            n,
            beta,
            samples,
            seed: 11,
        }
    }

    #[test]
    fn validation() {
        assert!(cfg(0, 1.0, 1).validate().is_err());
        assert!(cfg(2, 0.0, 1).validate().is_err());
        assert!(cfg(2, 1.0, 0).validate().is_err());
        assert!(sample_gbe(&cfg(2, -1.0, 1), 0).is_err());
    }

    #[test]
    fn sampling_is_deterministic_per_index() {
        let c = cfg(4, 1.5, 1);
        assert_eq!(sample_gbe(&c, 3).unwrap(), sample_gbe(&c, 3).unwrap());
        assert_ne!(sample_gbe(&c, 3).unwrap(), sample_gbe(&c, 4).unwrap());
        assert!(sample_gbe(&c, 0).unwrap().offdiag().iter().all(|&b| b > 0.0));
    }

    #[test]
    fn first_diagonal_entry_moments() {
        let c = cfg(3, 2.0, 10_000);
        let xs: Vec<f64> = (0..10_000)
            .map(|i| sample_gbe(&c, i).unwrap().diag()[0])
            .collect();
        assert!(Estimate::from_values(&xs).z_against(0.0) < 3.0);
        let sq: Vec<f64> = xs.iter().map(|x| x * x).collect();
        assert!(Estimate::from_values(&sq).z_against(2.0 / 2.0) < 3.0);
    }

    #[test]
    fn large_beta_concentrates_off_diagonal() {
        let c = cfg(4, 1e4, 200);
        for i in 0..200 {
            let h = sample_gbe(&c, i).unwrap();
            for (k, b) in h.offdiag().iter().enumerate() {
                let target = ((4 - (k + 1)) as f64).sqrt();
                assert!((b - target).abs() < 0.1, "{b} vs {target}");
            }
        }
    }

    #[test]
    fn trace_moment_small_case() {
        assert_eq!(expected_trace_square(2, 2.0), 4.0);
        let r = trace_moment_check(&cfg(2, 2.0, 10_000)).unwrap();
        assert!(r.passed, "{r:?}");
    }

    #[test]
    fn two_by_two_gap_second_moment_by_quadrature() {
        // Eigenvalue density of the 2x2 ensemble in the gap g:
        // proportional to g^beta exp(-beta g^2 / 8) on g > 0.
        let beta = 1.5;
        let w = |g: f64| g.powf(beta) * (-beta * g * g / 8.0).exp();
        let simpson = |f: &dyn Fn(f64) -> f64| {
            let (a, b, m) = (0.0, 40.0, 20_000);
            let h = (b - a) / m as f64;
            let mut s = f(a) + f(b);
            for i in 1..m {
                s += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
            }
            s * h / 3.0
        };
        let oracle = simpson(&|g| g * g * w(g)) / simpson(&w);
        let c = cfg(2, beta, 20_000);
        let gaps: Vec<f64> = (0..20_000)
            .map(|i| {
                let h = sample_gbe(&c, i).unwrap();
                let (a, d, b) = (h.diag()[0], h.diag()[1], h.offdiag()[0]);
                (a - d).powi(2) + 4.0 * b * b
            })
            .collect();
        let est = Estimate::from_values(&gaps);
        assert!(est.z_against(oracle) < 3.0, "{est:?} vs {oracle}");
    }

    #[test]
    fn chi_mean_matches_known_values() {
        // E[chi_1] = sqrt(2 / pi), E[chi_2] = sqrt(pi / 2)
        assert!((chi_mean(1.0) - (2.0 / std::f64::consts::PI).sqrt()).abs() < 1e-13);
        assert!((chi_mean(2.0) - (std::f64::consts::PI / 2.0).sqrt()).abs() < 1e-13);
    }

    #[test]
    fn time_slice_small_run() {
        let r = time_slice_check(2, 2.0, 4_000, 5).unwrap();
        assert!(r.passed, "{r:#?}");
        assert_eq!(r.alpha, vec![2.0]);
        assert_eq!(r.comparisons.len(), 6);
        let off2 = r
            .comparisons
            .iter()
            .find(|c| c.entry == Entry::Off(1) && c.moment == 2)
            .unwrap();
        assert_eq!(off2.exact, 1.0);
        assert!(off2.process.z_against(1.0) < 4.0);
    }
}
