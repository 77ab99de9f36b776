use serde::Serialize;

use super::{sde_terms_at, DysonError, MatrixPath, SpectralState, COLLISION_FLOOR_REL, PATH_EIG_TOL};
use crate::eig::Spectrum;

/// Why an integrated path ended before the end of its matrix path.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Truncation {
    /// The integrated spectrum lost simplicity or ordering at this time.
    Collision { time: f64, gap: f64 },
    /// The matrix path itself stopped at a Bessel hitting time.
    Absorption { time: f64 },
}

/// Euler-Maruyama solution of the eigenvalue SDE next to the eigenvalues of
/// the matrix path on the same grid.
#[derive(Debug, Clone, Serialize)]
pub struct IntegratedPath {
    pub times: Vec<f64>,
    pub integrated: Vec<Vec<f64>>,
    pub diagonalized: Vec<Vec<f64>>,
    pub truncation: Option<Truncation>,
}

impl IntegratedPath {
    /// `max_t |lambda_i^int(t) - lambda_i^diag(t)|` per grid time.
    pub fn discrepancies(&self) -> Vec<f64> {
        self.integrated
            .iter()
            .zip(&self.diagonalized)
            .map(|(a, b)| a.iter().zip(b).fold(0.0_f64, |m, (x, y)| m.max((x - y).abs())))
            .collect()
    }

    /// Largest discrepancy over the whole comparison window.
    pub fn max_discrepancy(&self) -> f64 {
        self.discrepancies().into_iter().fold(0.0, f64::max)
    }
}

/// Integrates the eigenvalue SDE from `eigs0` with the increments that drove
/// `path`. At every step the full spectrum entering the coefficients is the
/// integrated one, while the minor spectra and the Bessel values are read
/// off the matrix path by fresh diagonalization.
pub fn integrate_sde_path(path: &MatrixPath, eigs0: &Spectrum) -> Result<IntegratedPath, DysonError> {
    let n = path.config.n;
    if eigs0.len() != n {
        return Err(DysonError::Domain(format!(
            "starting spectrum has {} values, expected {n}",
            eigs0.len()
        )));
    }
    let floor = |v: &[f64]| {
        let d = v.last().unwrap_or(&0.0) - v.first().unwrap_or(&0.0);
        COLLISION_FLOOR_REL * d.max(f64::MIN_POSITIVE)
    };
    let gap = |v: &[f64]| v.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
    if gap(eigs0.values()) <= floor(eigs0.values()) {
        return Err(DysonError::Collision {
            gap: gap(eigs0.values()),
            floor: floor(eigs0.values()),
        });
    }

    let dt = path.config.dt;
    let alpha = &path.config.alpha;
    let mut lam = eigs0.values().to_vec();
    let mut times = Vec::with_capacity(path.len());
    let mut integrated = Vec::with_capacity(path.len());
    let mut diagonalized = Vec::with_capacity(path.len());
    let mut truncation = None;
    for (s, h) in path.matrices.iter().enumerate() {
        let st = SpectralState::from_matrix(h, PATH_EIG_TOL)?;
        times.push(path.times[s]);
        diagonalized.push(st.full().to_vec());
        integrated.push(lam.clone());
        if s + 1 == path.matrices.len() {
            break;
        }
        let st = st.with_full(lam.clone())?;
        let db = path.noise.diag_row(s);
        let dbo = path.noise.off_row(s);
        let mut next = Vec::with_capacity(n);
        for i in 0..n {
            let terms = match sde_terms_at(&st, alpha, i) {
                Ok(t) => t,
                Err(DysonError::Collision { gap, .. }) => {
                    truncation = Some(Truncation::Collision {
                        time: path.times[s],
                        gap,
                    });
                    break;
                }
                Err(e) => return Err(e),
            };
            let c = &terms.coeffs;
            let noise: f64 = c
                .diag
                .iter()
                .zip(db)
                .chain(c.off.iter().zip(dbo))
                .map(|(a, b)| a * b)
                .sum();
            next.push(lam[i] + terms.drift * dt + noise);
        }
        if truncation.is_some() {
            break;
        }
        if gap(&next) <= floor(&next) {
            truncation = Some(Truncation::Collision {
                time: path.times[s + 1],
                gap: gap(&next),
            });
            break;
        }
        lam = next;
    }
    if truncation.is_none() {
        if let Some(time) = path.stopped_at {
            truncation = Some(Truncation::Absorption { time });
        }
    }
    Ok(IntegratedPath {
        times,
        integrated,
        diagonalized,
        truncation,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dyson::{simulate_matrix_path, MatrixPath};
    use crate::eig::eigenvalues;
    use crate::sde::{NoiseGrid, SdeConfig};
    use crate::tridiag::SymTridiag;

    #[test]
    fn noise_free_two_by_two_follows_the_ode() {
        // frozen matrix, zero noise: lambda_1 - lambda_2 = g with
        // g' = 2 alpha / g, so g(t)^2 = g(0)^2 + 4 alpha t
        let alpha = 3.0;
        let mut c = SdeConfig::new(vec![alpha], vec![1.0], 1e-4, 0.1, 0);
        c.diag0 = Some(vec![0.0, 0.0]);
        let h = SymTridiag::new(vec![0.0, 0.0], vec![1.0]).unwrap();
        let steps = c.steps();
        let path = MatrixPath {
            times: (0..=steps).map(|s| s as f64 * c.dt).collect(),
            matrices: vec![h.clone(); steps + 1],
            noise: NoiseGrid::zeros(steps, 2, c.dt),
            stopped_at: None,
            config: c,
        };
        let e0 = eigenvalues(&h, 1e-15).unwrap();
        let out = integrate_sde_path(&path, &e0).unwrap();
        assert!(out.truncation.is_none());
        let last = out.integrated.last().unwrap();
        let g = (4.0 + 4.0 * alpha * 0.1_f64).sqrt();
        assert!((last[1] - last[0] - g).abs() < 1e-4, "{last:?}");
        assert!((last[0] + last[1]).abs() < 1e-12);
    }

    #[test]
    fn tracks_diagonalization_closely() {
        let c = SdeConfig::new(vec![3.0, 3.0], vec![1.0, 1.0], 2e-4, 0.1, 5);
        let p = simulate_matrix_path(&c, 0).unwrap();
        let e0 = eigenvalues(&p.matrices[0], PATH_EIG_TOL).unwrap();
        let out = integrate_sde_path(&p, &e0).unwrap();
        assert_eq!(out.integrated.len(), p.len());
        assert!(out.max_discrepancy() < 0.05, "{}", out.max_discrepancy());
    }

    #[test]
    fn rejects_mismatched_start() {
        let c = SdeConfig::new(vec![3.0], vec![1.0], 1e-2, 0.1, 5);
        let p = simulate_matrix_path(&c, 0).unwrap();
        let bad = Spectrum::from_values(vec![0.0], 0.0);
        assert!(integrate_sde_path(&p, &bad).is_err());
        let collided = Spectrum::from_values(vec![1.0, 1.0], 0.0);
        assert!(matches!(
            integrate_sde_path(&p, &collided),
            Err(DysonError::Collision { .. })
        ));
    }
}
