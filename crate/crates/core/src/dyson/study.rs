//! Ensemble statistics over simulated paths.

use serde::Serialize;

use super::{
    diffusion_coeffs_at, f_fraction_at, iden_residual_at, integrate_sde_path, qv_rate_at,
    simulate_from_noise, DysonError, MatrixPath, SpectralState, Truncation, PATH_EIG_TOL,
};
use crate::eig::eigenvalues;
use crate::sde::{aux_rng, make_noise, SdeConfig};

/// Extremes of the pointwise SDE quantities along one or more paths.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PathScan {
    /// Grid times at which the terms were evaluated.
    pub times: usize,
    /// Grid times skipped because the full spectrum had collided.
    pub skipped: usize,
    pub max_iden_residual: f64,
    /// Largest `|c| / sqrt(2)` over the `dB_k` coefficients.
    pub max_normalized_diag: f64,
    /// Largest `|c| / sqrt(2)` over the `dB_{k,k+1}` coefficients.
    pub max_normalized_off: f64,
    pub min_f_fraction: f64,
    pub max_f_fraction: f64,
    pub min_qv_rate: f64,
    pub max_qv_rate: f64,
}

impl Default for PathScan {
    fn default() -> Self {
        Self {
            times: 0,
            skipped: 0,
            max_iden_residual: 0.0,
            max_normalized_diag: 0.0,
            max_normalized_off: 0.0,
            min_f_fraction: f64::INFINITY,
            max_f_fraction: f64::NEG_INFINITY,
            min_qv_rate: f64::INFINITY,
            max_qv_rate: f64::NEG_INFINITY,
        }
    }
}

impl PathScan {
    pub fn merge(&mut self, o: &PathScan) {
        self.times += o.times;
        self.skipped += o.skipped;
        self.max_iden_residual = self.max_iden_residual.max(o.max_iden_residual);
        self.max_normalized_diag = self.max_normalized_diag.max(o.max_normalized_diag);
        self.max_normalized_off = self.max_normalized_off.max(o.max_normalized_off);
        self.min_f_fraction = self.min_f_fraction.min(o.min_f_fraction);
        self.max_f_fraction = self.max_f_fraction.max(o.max_f_fraction);
        self.min_qv_rate = self.min_qv_rate.min(o.min_qv_rate);
        self.max_qv_rate = self.max_qv_rate.max(o.max_qv_rate);
    }
}

/// Evaluates the identity residual, the normalized diffusion coefficients,
/// the F-sum fraction and the diagonal QV rate for every eigenvalue at
/// every retained time of `path`.
pub fn scan_path(path: &MatrixPath) -> Result<PathScan, DysonError> {
    let mut out = PathScan::default();
    for h in &path.matrices {
        let st = SpectralState::from_matrix(h, PATH_EIG_TOL)?;
        let mut point = PathScan::default();
        let mut collided = false;
        for i in 0..st.n() {
            point.max_iden_residual = point.max_iden_residual.max(iden_residual_at(&st, i)?);
            let c = match diffusion_coeffs_at(&st, i) {
                Ok(c) => c.normalized(),
                Err(DysonError::Collision { .. }) => {
                    collided = true;
                    break;
                }
                Err(e) => return Err(e),
            };
            let fold = |v: &[f64]| v.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
            point.max_normalized_diag = point.max_normalized_diag.max(fold(&c.diag));
            point.max_normalized_off = point.max_normalized_off.max(fold(&c.off));
            let frac = f_fraction_at(&st, i)?;
            point.min_f_fraction = point.min_f_fraction.min(frac);
            point.max_f_fraction = point.max_f_fraction.max(frac);
            let rate = qv_rate_at(&st, i, i)?;
            point.min_qv_rate = point.min_qv_rate.min(rate);
            point.max_qv_rate = point.max_qv_rate.max(rate);
        }
        if collided {
            out.skipped += 1;
            out.max_iden_residual = out.max_iden_residual.max(point.max_iden_residual);
        } else {
            point.times = 1;
            out.merge(&point);
        }
    }
    Ok(out)
}

/// Realized and model covariations of the eigenvalues over one path.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QvSample {
    /// Length of the window, `t_last - t_0`.
    pub horizon: f64,
    /// `sum_s dlambda_i dlambda_j` over the grid.
    pub realized: Vec<Vec<f64>>,
    /// Left Riemann sum of `qv_rate_at(i, j) dt`.
    pub integrated: Vec<Vec<f64>>,
}

pub fn qv_sample(path: &MatrixPath) -> Result<QvSample, DysonError> {
    let n = path.config.n;
    let mut realized = vec![vec![0.0; n]; n];
    let mut integrated = vec![vec![0.0; n]; n];
    let mut prev: Option<SpectralState> = None;
    for (s, h) in path.matrices.iter().enumerate() {
        let st = SpectralState::from_matrix(h, PATH_EIG_TOL)?;
        if let Some(p) = prev.take() {
            let dt = path.times[s] - path.times[s - 1];
            let d: Vec<f64> = st.full().iter().zip(p.full()).map(|(a, b)| a - b).collect();
            for i in 0..n {
                for j in i..n {
                    realized[i][j] += d[i] * d[j];
                    integrated[i][j] += qv_rate_at(&p, i, j)? * dt;
                }
            }
        }
        prev = Some(st);
    }
    for i in 0..n {
        for j in 0..i {
            realized[i][j] = realized[j][i];
            integrated[i][j] = integrated[j][i];
        }
    }
    let horizon = match (path.times.first(), path.times.last()) {
        (Some(a), Some(b)) => b - a,
        _ => 0.0,
    };
    Ok(QvSample {
        horizon,
        realized,
        integrated,
    })
}

/// Path averages of [`QvSample`]s, with the standard error of the mean
/// per-path difference `realized - integrated`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QvSummary {
    pub paths: usize,
    pub mean_horizon: f64,
    pub mean_realized: Vec<Vec<f64>>,
    pub mean_integrated: Vec<Vec<f64>>,
    pub diff_std_error: Vec<Vec<f64>>,
}

impl QvSummary {
    /// Panics on an empty slice or mixed sizes.
    pub fn from_samples(samples: &[QvSample]) -> Self {
        let m = samples.len();
        assert!(m > 0, "no samples");
        let n = samples[0].realized.len();
        let mean = |f: &dyn Fn(&QvSample, usize, usize) -> f64| {
            (0..n)
                .map(|i| {
                    (0..n)
                        .map(|j| samples.iter().map(|s| f(s, i, j)).sum::<f64>() / m as f64)
                        .collect()
                })
                .collect::<Vec<Vec<f64>>>()
        };
        let mean_realized = mean(&|s, i, j| s.realized[i][j]);
        let mean_integrated = mean(&|s, i, j| s.integrated[i][j]);
        let diff = |s: &QvSample, i: usize, j: usize| s.realized[i][j] - s.integrated[i][j];
        let diff_std_error = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        if m < 2 {
                            return f64::INFINITY;
                        }
                        let mu = mean_realized[i][j] - mean_integrated[i][j];
                        let var = samples.iter().map(|s| (diff(s, i, j) - mu).powi(2)).sum::<f64>()
                            / (m - 1) as f64;
                        (var / m as f64).sqrt()
                    })
                    .collect()
            })
            .collect();
        Self {
            paths: m,
            mean_horizon: samples.iter().map(|s| s.horizon).sum::<f64>() / m as f64,
            mean_realized,
            mean_integrated,
            diff_std_error,
        }
    }

    /// `|realized - integrated| / |integrated|` for the mean `<lambda_i>`.
    pub fn diag_rel_error(&self, i: usize) -> f64 {
        let r = self.mean_realized[i][i];
        let q = self.mean_integrated[i][i];
        (r - q).abs() / q.abs()
    }

    /// Mean difference in units of its standard error.
    pub fn z_score(&self, i: usize, j: usize) -> f64 {
        let d = self.mean_realized[i][j] - self.mean_integrated[i][j];
        let se = self.diff_std_error[i][j];
        if se > 0.0 {
            d.abs() / se
        } else if d == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    }
}

/// Tracking error of the integrated SDE at step `dt` and at `dt / 2` for one
/// path, both driven by the same Brownian path.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergencePoint {
    pub path_index: u64,
    pub coarse_dt: f64,
    pub coarse_error: f64,
    pub fine_error: f64,
    pub coarse_truncation: Option<Truncation>,
    pub fine_truncation: Option<Truncation>,
}

impl ConvergencePoint {
    pub fn reduced(&self) -> bool {
        self.fine_error < self.coarse_error
    }
}

/// Simulates path `path_index` at `config.dt / 2`, sums the increments in
/// pairs to drive the `config.dt` path, and integrates the eigenvalue SDE
/// along both. Both levels share one auxiliary stream seed, which only
/// matters for the exact Bessel scheme (whose draws are not coupled across
/// levels).
pub fn convergence_pair(config: &SdeConfig, path_index: u64) -> Result<ConvergencePoint, DysonError> {
    config.validate()?;
    let mut fine_cfg = config.clone();
    fine_cfg.dt = config.dt / 2.0;
    let fine_noise = make_noise(&fine_cfg, path_index);
    let coarse_noise = fine_noise.coarsen(2)?;
    let run = |cfg: &SdeConfig, noise| -> Result<_, DysonError> {
        let path = simulate_from_noise(cfg, noise, &mut aux_rng(cfg.seed, path_index))?;
        let e0 = eigenvalues(&path.matrices[0], PATH_EIG_TOL)?;
        integrate_sde_path(&path, &e0)
    };
    let coarse = run(config, coarse_noise)?;
    let fine = run(&fine_cfg, fine_noise)?;
    Ok(ConvergencePoint {
        path_index,
        coarse_dt: config.dt,
        coarse_error: coarse.max_discrepancy(),
        fine_error: fine.max_discrepancy(),
        coarse_truncation: coarse.truncation,
        fine_truncation: fine.truncation,
    })
}
