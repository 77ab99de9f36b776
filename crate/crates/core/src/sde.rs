//! Driving noise and one-step integrators for the Brownian diagonal and the
//! Bessel off-diagonal coordinates.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, Poisson, StandardNormal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SdeError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("Bessel coordinate already absorbed at t = {0}")]
    Absorbed(f64),
    #[error("cannot coarsen {steps} steps by a factor of {factor}")]
    Coarsen { steps: usize, factor: usize },
    #[error("noise array has length {got}, expected {expected}")]
    NoiseShape { expected: usize, got: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    #[default]
    EulerMaruyama,
    ExactSquaredBessel,
}

impl std::str::FromStr for Scheme {
    type Err = SdeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "euler_maruyama" | "em" => Ok(Scheme::EulerMaruyama),
            "exact_squared_bessel" | "exact" => Ok(Scheme::ExactSquaredBessel),
            other => Err(SdeError::Config(format!("unknown scheme `{other}`"))),
        }
    }
}

impl std::fmt::Display for Scheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Scheme::EulerMaruyama => "euler_maruyama",
            Scheme::ExactSquaredBessel => "exact_squared_bessel",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SdeConfig {
    pub n: usize,
    /// Bessel dimensions, one per off-diagonal.
    pub alpha: Vec<f64>,
    /// Bessel starting points, one per off-diagonal.
    pub x0: Vec<f64>,
    pub dt: f64,
    pub t_end: f64,
    pub seed: u64,
    pub scheme: Scheme,
    /// Initial diagonal; `None` means all zeros.
    pub diag0: Option<Vec<f64>>,
}

impl SdeConfig {
    /// Config with zero initial diagonal and the Euler-Maruyama scheme.
    pub fn new(alpha: Vec<f64>, x0: Vec<f64>, dt: f64, t_end: f64, seed: u64) -> Self {
        Self {
            n: alpha.len() + 1,
            alpha,
            x0,
            dt,
            t_end,
            seed,
            scheme: Scheme::EulerMaruyama,
            diag0: None,
        }
    }

    pub fn validate(&self) -> Result<(), SdeError> {
        let err = |m: String| Err(SdeError::Config(m));
        if self.n == 0 {
            return err("n must be at least 1".into());
        }
        if self.alpha.len() != self.n - 1 {
            return err(format!(
                "alpha has {} entries, expected {}",
                self.alpha.len(),
                self.n - 1
            ));
        }
        if self.x0.len() != self.n - 1 {
            return err(format!(
                "x0 has {} entries, expected {}",
                self.x0.len(),
                self.n - 1
            ));
        }
        if let Some(k) = self.alpha.iter().position(|a| !(*a > 0.0 && a.is_finite())) {
            return err(format!("alpha[{}] = {} must be positive", k + 1, self.alpha[k]));
        }
        if let Some(k) = self.x0.iter().position(|x| !(*x >= 0.0 && x.is_finite())) {
            return err(format!("x0[{}] = {} must be nonnegative", k + 1, self.x0[k]));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return err(format!("dt = {} must be positive", self.dt));
        }
        if !(self.t_end >= self.dt && self.t_end.is_finite()) {
            return err(format!(
                "t_end = {} must be at least dt = {}",
                self.t_end, self.dt
            ));
        }
        if let Some(d) = &self.diag0 {
            if d.len() != self.n {
                return err(format!("diag0 has {} entries, expected {}", d.len(), self.n));
            }
            if d.iter().any(|v| !v.is_finite()) {
                return err("diag0 entries must be finite".into());
            }
        }
        Ok(())
    }

    /// Number of grid steps, `round(t_end / dt)`.
    pub fn steps(&self) -> usize {
        (self.t_end / self.dt).round() as usize
    }

    pub fn initial_diag(&self) -> Vec<f64> {
        self.diag0.clone().unwrap_or_else(|| vec![0.0; self.n])
    }
}

/// Gaussian increments for the `n` diagonal and `n - 1` off-diagonal
/// Brownian motions on a uniform grid.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseGrid {
    steps: usize,
    n: usize,
    dt: f64,
    db_diag: Vec<f64>,
    db_off: Vec<f64>,
}

impl NoiseGrid {
    /// Row-major arrays: `db_diag` is `steps x n`, `db_off` is `steps x (n-1)`.
    pub fn from_arrays(n: usize, dt: f64, db_diag: Vec<f64>, db_off: Vec<f64>) -> Result<Self, SdeError> {
        let steps = if n == 0 { 0 } else { db_diag.len() / n };
        if db_diag.len() != steps * n {
            return Err(SdeError::NoiseShape {
                expected: steps * n,
                got: db_diag.len(),
            });
        }
        let off_len = steps * n.saturating_sub(1);
        if db_off.len() != off_len {
            return Err(SdeError::NoiseShape {
                expected: off_len,
                got: db_off.len(),
            });
        }
        Ok(Self {
            steps,
            n,
            dt,
            db_diag,
            db_off,
        })
    }

    pub fn zeros(steps: usize, n: usize, dt: f64) -> Self {
        Self {
            steps,
            n,
            dt,
            db_diag: vec![0.0; steps * n],
            db_off: vec![0.0; steps * n.saturating_sub(1)],
        }
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn diag_row(&self, step: usize) -> &[f64] {
        &self.db_diag[step * self.n..(step + 1) * self.n]
    }

    pub fn off_row(&self, step: usize) -> &[f64] {
        let m = self.n.saturating_sub(1);
        &self.db_off[step * m..(step + 1) * m]
    }

    pub fn db_diag(&self) -> &[f64] {
        &self.db_diag
    }

    pub fn db_off(&self) -> &[f64] {
        &self.db_off
    }

    /// Sums blocks of `factor` consecutive increments, giving the same
    /// Brownian paths sampled on a grid `factor` times coarser.
    pub fn coarsen(&self, factor: usize) -> Result<Self, SdeError> {
        if factor == 0 || self.steps % factor != 0 {
            return Err(SdeError::Coarsen {
                steps: self.steps,
                factor,
            });
        }
        let sum_blocks = |data: &[f64], width: usize| {
            let mut out = vec![0.0; (self.steps / factor) * width];
            for s in 0..self.steps {
                let dst = (s / factor) * width;
                for j in 0..width {
                    out[dst + j] += data[s * width + j];
                }
            }
            out
        };
        Ok(Self {
            steps: self.steps / factor,
            n: self.n,
            dt: self.dt * factor as f64,
            db_diag: sum_blocks(&self.db_diag, self.n),
            db_off: sum_blocks(&self.db_off, self.n.saturating_sub(1)),
        })
    }
}

/// Generator for path `path_index`. Stream `2i` feeds the Brownian
/// increments; stream `2i + 1` is left for auxiliary draws.
fn path_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Auxiliary generator for path `path_index`, independent of its noise.
pub fn aux_rng(seed: u64, path_index: u64) -> ChaCha8Rng {
    path_rng(seed, 2 * path_index + 1)
}

/// Deterministic noise for `(config.seed, path_index)`. Each step draws the
/// `n` diagonal increments and then the `n - 1` off-diagonal ones.
pub fn make_noise(config: &SdeConfig, path_index: u64) -> NoiseGrid {
    let steps = config.steps();
    let n = config.n;
    let mut rng = path_rng(config.seed, 2 * path_index);
    let sd = config.dt.sqrt();
    let mut db_diag = Vec::with_capacity(steps * n);
    let mut db_off = Vec::with_capacity(steps * n.saturating_sub(1));
    for _ in 0..steps {
        for _ in 0..n {
            db_diag.push(sd * rng.sample::<f64, _>(StandardNormal));
        }
        for _ in 1..n {
            db_off.push(sd * rng.sample::<f64, _>(StandardNormal));
        }
    }
    NoiseGrid {
        steps,
        n,
        dt: config.dt,
        db_diag,
        db_off,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BesselState {
    pub value: f64,
    pub absorbed: bool,
    pub absorption_time: Option<f64>,
}

impl BesselState {
    pub fn new(x0: f64) -> Self {
        Self {
            value: x0,
            absorbed: false,
            absorption_time: None,
        }
    }
}

/// Euler-Maruyama step of `dX = dW + (alpha - 1) / (2X) dt` from time `t`.
///
/// The drift uses `1 / max(x, sqrt(dt))`. Below dimension 2 a step landing
/// at or below zero absorbs, with the hitting time interpolated linearly in
/// the step; at dimension 2 or more it is reflected.
pub fn bessel_step(x: &BesselState, alpha: f64, t: f64, dt: f64, dw: f64) -> Result<BesselState, SdeError> {
    if x.absorbed {
        return Err(SdeError::Absorbed(x.absorption_time.unwrap_or(t)));
    }
    let floor = dt.sqrt();
    let next = x.value + dw + 0.5 * (alpha - 1.0) * dt / x.value.max(floor);
    if next > 0.0 {
        return Ok(BesselState::new(next));
    }
    if alpha >= 2.0 {
        return Ok(BesselState::new(-next));
    }
    let frac = if x.value - next > 0.0 {
        x.value / (x.value - next)
    } else {
        0.0
    };
    Ok(BesselState {
        value: 0.0,
        absorbed: true,
        absorption_time: Some(t + dt * frac),
    })
}

/// Exact transition over `dt`: `X^2` is a squared Bessel process, whose
/// law at `t + dt` is `dt` times a noncentral chi-square with `alpha` degrees
/// of freedom and noncentrality `x^2 / dt`. Sampled as a Poisson mixture of
/// central chi-squares. Never absorbs.
pub fn bessel_step_exact<R: Rng + ?Sized>(
    x: &BesselState,
    alpha: f64,
    dt: f64,
    rng: &mut R,
) -> Result<BesselState, SdeError> {
    if x.absorbed {
        return Err(SdeError::Absorbed(x.absorption_time.unwrap_or(0.0)));
    }
    let half_nc = x.value * x.value / (2.0 * dt);
    let k = if half_nc > 0.0 {
        let pois = Poisson::new(half_nc).map_err(|e| SdeError::Config(e.to_string()))?;
        pois.sample(rng)
    } else {
        0.0
    };
    let shape = 0.5 * alpha + k;
    let gamma = Gamma::new(shape, 2.0).map_err(|e| SdeError::Config(e.to_string()))?;
    let y: f64 = gamma.sample(rng);
    Ok(BesselState::new((dt * y).sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(n: usize) -> SdeConfig {
        SdeConfig::new(vec![2.0; n - 1], vec![1.0; n - 1], 1e-3, 0.1, 7)
    }

    #[test]
    fn validation() {
        assert!(cfg(3).validate().is_ok());
        let mut c = cfg(3);
        c.alpha[1] = 0.0;
        assert!(c.validate().is_err());
        let mut c = cfg(3);
        c.x0[0] = -0.1;
        assert!(c.validate().is_err());
        let mut c = cfg(3);
        c.t_end = 1e-4;
        assert!(c.validate().is_err());
        let mut c = cfg(3);
        c.diag0 = Some(vec![0.0; 2]);
        assert!(c.validate().is_err());
        let mut c = cfg(3);
        c.alpha.pop();
        assert!(c.validate().is_err());
        assert_eq!(cfg(3).steps(), 100);
    }

    #[test]
    fn scheme_round_trips_through_strings() {
        for s in [Scheme::EulerMaruyama, Scheme::ExactSquaredBessel] {
            assert_eq!(s.to_string().parse::<Scheme>().unwrap(), s);
        }
        assert!("rk4".parse::<Scheme>().is_err());
    }

    #[test]
    fn noise_is_deterministic() {
        let c = cfg(3);
        assert_eq!(make_noise(&c, 4), make_noise(&c, 4));
        assert_ne!(make_noise(&c, 4), make_noise(&c, 5));
    }

    #[test]
    fn distinct_paths_are_uncorrelated() {
        let mut c = SdeConfig::new(vec![], vec![], 1.0, 1e4, 11);
        c.n = 1;
        let a = make_noise(&c, 0);
        let b = make_noise(&c, 1);
        let (x, y) = (a.db_diag(), b.db_diag());
        assert_eq!(x.len(), 10_000);
        let m = x.len() as f64;
        let mx = x.iter().sum::<f64>() / m;
        let my = y.iter().sum::<f64>() / m;
        let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
        for (u, v) in x.iter().zip(y) {
            sxy += (u - mx) * (v - my);
            sxx += (u - mx).powi(2);
            syy += (v - my).powi(2);
        }
        assert!((sxy / (sxx * syy).sqrt()).abs() < 0.05);
    }

    #[test]
    fn increment_variance_is_dt() {
        let c = SdeConfig::new(vec![1.0; 4], vec![1.0; 4], 1e-3, 25.0, 3);
        let g = make_noise(&c, 0);
        let all: Vec<f64> = g.db_diag().iter().chain(g.db_off()).copied().collect();
        assert!(all.len() >= 100_000);
        let m = all.len() as f64;
        let mean = all.iter().sum::<f64>() / m;
        let var = all.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (m - 1.0);
        assert!((var / c.dt - 1.0).abs() < 0.05, "var {var}");
    }

    #[test]
    fn coarsen_sums_blocks() {
        let g = NoiseGrid::from_arrays(
            2,
            0.5,
            vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0],
            vec![1.0, 1.0, 2.0, 3.0],
        )
        .unwrap();
        let h = g.coarsen(2).unwrap();
        assert_eq!(h.steps(), 2);
        assert_eq!(h.dt(), 1.0);
        assert_eq!(h.diag_row(0), &[4.0, 6.0]);
        assert_eq!(h.diag_row(1), &[12.0, 14.0]);
        assert_eq!(h.off_row(1), &[5.0]);
        assert!(g.coarsen(3).is_err());
        assert!(g.coarsen(0).is_err());
    }

    #[test]
    fn em_step_examples() {
        let s = bessel_step(&BesselState::new(1.0), 3.0, 0.0, 0.01, 0.0).unwrap();
        assert!((s.value - 1.01).abs() < 1e-15);
        let s = bessel_step(&BesselState::new(0.7), 1.0, 0.0, 0.01, 0.123).unwrap();
        assert_eq!(s.value, 0.7 + 0.123);
    }

    #[test]
    fn em_step_absorbs_below_dimension_two() {
        let s = bessel_step(&BesselState::new(0.1), 1.0, 2.0, 0.01, -0.3).unwrap();
        assert!(s.absorbed);
        assert_eq!(s.value, 0.0);
        // 0.1 -> -0.2 crosses zero a third of the way through the step
        assert!((s.absorption_time.unwrap() - (2.0 + 0.01 / 3.0)).abs() < 1e-15);
        assert!(matches!(
            bessel_step(&s, 1.0, 2.01, 0.01, 0.0),
            Err(SdeError::Absorbed(_))
        ));
    }

    #[test]
    fn em_step_reflects_at_dimension_two() {
        let s = bessel_step(&BesselState::new(0.1), 2.0, 0.0, 0.01, -0.3).unwrap();
        assert!(!s.absorbed);
        assert!((s.value - 0.15).abs() < 1e-15);
    }

    #[test]
    fn driftless_case_is_brownian() {
        // alpha = 1: realized quadratic variation over [0, 1] is close to 1
        let c = SdeConfig::new(vec![1.0], vec![5.0], 1e-4, 1.0, 19);
        let g = make_noise(&c, 0);
        let mut x = BesselState::new(5.0);
        let mut qv = 0.0;
        for s in 0..g.steps() {
            let next = bessel_step(&x, 1.0, s as f64 * c.dt, c.dt, g.off_row(s)[0]).unwrap();
            qv += (next.value - x.value).powi(2);
            x = next;
        }
        assert!((qv - 1.0).abs() < 0.05, "qv {qv}");
    }

    #[test]
    fn exact_marginal_from_zero() {
        // X(1)^2 from 0 is chi-square with alpha degrees of freedom
        let alpha = 2.5;
        let mut rng = aux_rng(5, 0);
        let m = 10_000;
        let draws: Vec<f64> = (0..m)
            .map(|_| {
                bessel_step_exact(&BesselState::new(0.0), alpha, 1.0, &mut rng)
                    .unwrap()
                    .value
                    .powi(2)
            })
            .collect();
        let mean = draws.iter().sum::<f64>() / m as f64;
        let var = draws.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (m as f64 - 1.0);
        let se = (var / m as f64).sqrt();
        assert!((mean - alpha).abs() < 3.0 * se, "mean {mean}, se {se}");
    }

    #[test]
    fn exact_step_first_moment_from_positive_start() {
        // E[X_{t+dt}^2 | X_t = x] = x^2 + alpha dt
        let (alpha, x, dt) = (3.0, 0.8, 0.25);
        let mut rng = aux_rng(9, 2);
        let m = 20_000;
        let draws: Vec<f64> = (0..m)
            .map(|_| {
                bessel_step_exact(&BesselState::new(x), alpha, dt, &mut rng)
                    .unwrap()
                    .value
                    .powi(2)
            })
            .collect();
        let mean = draws.iter().sum::<f64>() / m as f64;
        let var = draws.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (m as f64 - 1.0);
        let se = (var / m as f64).sqrt();
        assert!((mean - (x * x + alpha * dt)).abs() < 4.0 * se);
    }

    #[test]
    fn low_dimension_absorbs_often() {
        let c = SdeConfig::new(vec![0.5], vec![0.1], 1e-3, 1.0, 23);
        let paths = 1000;
        let mut absorbed = 0;
        for p in 0..paths {
            let g = make_noise(&c, p);
            let mut x = BesselState::new(0.1);
            for s in 0..g.steps() {
                x = bessel_step(&x, 0.5, s as f64 * c.dt, c.dt, g.off_row(s)[0]).unwrap();
                if x.absorbed {
                    absorbed += 1;
                    break;
                }
            }
        }
        assert!(absorbed as f64 / paths as f64 > 0.05, "{absorbed}");
    }
}
