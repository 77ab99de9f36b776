//! Matrix-valued paths `H(t)` with Brownian diagonal and Bessel off-diagonal,
//! the eigenvalue paths of their principal minors, and the terms of the
//! eigenvalue SDE evaluated along them.

mod collision;
mod integrate;
pub mod study;
mod terms;

use std::collections::{BTreeSet, HashMap};

use rand::Rng;
use thiserror::Error;

use crate::eig::{eigenvalues, EigError, Spectrum};
use crate::sde::{
    aux_rng, bessel_step, bessel_step_exact, make_noise, BesselState, NoiseGrid, Scheme, SdeConfig, SdeError,
};
use crate::tridiag::{MinorRange, SymTridiag, TridiagError};

pub use collision::{
    default_eps_col, detect_collisions, interlacing_summary, CollisionReport, InterlacingSummary,
    RangeCollision,
};
pub use integrate::{integrate_sde_path, IntegratedPath, Truncation};
pub use terms::{
    diffusion_coeffs_at, drift_at, f_fraction_at, f_kl, f_sum_at, iden_residual_at, qv_rate_at, sde_terms_at,
    DiffusionCoeffs, SdeTerms,
};

/// Absolute tolerance for eigenvalues computed along paths.
pub const PATH_EIG_TOL: f64 = 1e-13;

/// Gaps below this fraction of the spectral diameter count as a collision
/// for the SDE evaluators.
pub const COLLISION_FLOOR_REL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DysonError {
    #[error(transparent)]
    Sde(#[from] SdeError),
    #[error(transparent)]
    Eig(#[from] EigError),
    #[error(transparent)]
    Tridiag(#[from] TridiagError),
    #[error("{0}")]
    Domain(String),
    #[error("spectrum has collided: gap {gap:e} below floor {floor:e}")]
    Collision { gap: f64, floor: f64 },
    #[error("eigenvalue index {index} out of range for n = {n}")]
    Index { index: usize, n: usize },
    #[error("minor {0} is not tracked")]
    MissingRange(MinorRange),
}

/// A simulated path of `H(t)` on a uniform grid, truncated before the first
/// Bessel absorption.
#[derive(Debug, Clone)]
pub struct MatrixPath {
    pub config: SdeConfig,
    /// Grid times `s * dt`, all strictly before `stopped_at` when it is set.
    pub times: Vec<f64>,
    pub matrices: Vec<SymTridiag>,
    pub noise: NoiseGrid,
    /// First absorption time of any off-diagonal Bessel coordinate.
    pub stopped_at: Option<f64>,
}

impl MatrixPath {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Off-diagonal (Bessel) values at grid index `s`.
    pub fn bessel_values(&self, s: usize) -> &[f64] {
        self.matrices[s].offdiag()
    }
}

/// Simulates path `path_index` of `config` from its own noise streams.
pub fn simulate_matrix_path(config: &SdeConfig, path_index: u64) -> Result<MatrixPath, DysonError> {
    config.validate()?;
    let noise = make_noise(config, path_index);
    let mut aux = aux_rng(config.seed, path_index);
    simulate_from_noise(config, noise, &mut aux)
}

/// Simulates `H(t)` driven by the given increments. The diagonal is
/// `diag0 + sqrt(2) B(t)`; the off-diagonals follow `config.scheme`, and the
/// exact scheme draws from `aux` instead of the off-diagonal increments.
pub fn simulate_from_noise<R: Rng + ?Sized>(
    config: &SdeConfig,
    noise: NoiseGrid,
    aux: &mut R,
) -> Result<MatrixPath, DysonError> {
    config.validate()?;
    if noise.n() != config.n || noise.steps() != config.steps() {
        return Err(DysonError::Domain(format!(
            "noise grid is {}x{}, config needs {}x{}",
            noise.steps(),
            noise.n(),
            config.steps(),
            config.n
        )));
    }
    if (noise.dt() - config.dt).abs() > 1e-12 * config.dt {
        return Err(DysonError::Domain(format!(
            "noise step {} does not match dt = {}",
            noise.dt(),
            config.dt
        )));
    }

    let h0 = SymTridiag::new(config.initial_diag(), config.x0.clone())?;
    if config.x0.contains(&0.0) {
        let s = eigenvalues(&h0, PATH_EIG_TOL)?;
        let floor = COLLISION_FLOOR_REL * s.diameter().max(1.0);
        if s.min_gap() <= floor {
            return Err(DysonError::Domain(format!(
                "initial spectrum is not simple (gap {:e})",
                s.min_gap()
            )));
        }
    }
    run_path(config, noise, aux)
}

/// Simulates the matrix process alone for path `path_index`, without the
/// simple-spectrum precondition that the eigenvalue equation needs (so
/// `H(0) = 0` is allowed).
pub fn simulate_entries(config: &SdeConfig, path_index: u64) -> Result<MatrixPath, DysonError> {
    config.validate()?;
    let noise = make_noise(config, path_index);
    run_path(config, noise, &mut aux_rng(config.seed, path_index))
}

fn run_path<R: Rng + ?Sized>(
    config: &SdeConfig,
    noise: NoiseGrid,
    aux: &mut R,
) -> Result<MatrixPath, DysonError> {
    let dt = config.dt;
    let mut diag = config.initial_diag();
    let mut bessel: Vec<BesselState> = config.x0.iter().map(|&x| BesselState::new(x)).collect();
    let h0 = SymTridiag::new(diag.clone(), config.x0.clone())?;
    let steps = noise.steps();
    let mut times = Vec::with_capacity(steps + 1);
    let mut matrices = Vec::with_capacity(steps + 1);
    times.push(0.0);
    matrices.push(h0);
    let mut stopped_at = None;
    for s in 0..steps {
        let t = s as f64 * dt;
        let mut next = Vec::with_capacity(bessel.len());
        for (k, x) in bessel.iter().enumerate() {
            let y = match config.scheme {
                Scheme::EulerMaruyama => bessel_step(x, config.alpha[k], t, dt, noise.off_row(s)[k])?,
                Scheme::ExactSquaredBessel => bessel_step_exact(x, config.alpha[k], dt, aux)?,
            };
            if let Some(t0) = y.absorption_time {
                stopped_at = Some(stopped_at.map_or(t0, |m: f64| m.min(t0)));
            }
            next.push(y);
        }
        if stopped_at.is_some() {
            break;
        }
        bessel = next;
        for (a, db) in diag.iter_mut().zip(noise.diag_row(s)) {
            *a += std::f64::consts::SQRT_2 * db;
        }
        let off: Vec<f64> = bessel.iter().map(|x| x.value).collect();
        times.push((s + 1) as f64 * dt);
        matrices.push(SymTridiag::new(diag.clone(), off)?);
    }
    Ok(MatrixPath {
        config: config.clone(),
        times,
        matrices,
        noise,
        stopped_at,
    })
}

/// The leading minors `(1, k)` and trailing minors `(k, n)` that the SDE
/// coefficients need, including the full range.
pub fn required_ranges(n: usize) -> BTreeSet<MinorRange> {
    let mut out = BTreeSet::new();
    for m in 1..=n {
        out.insert(MinorRange::new(1, m));
        out.insert(MinorRange::new(m, n));
    }
    out
}

/// Every nonempty contiguous principal minor.
pub fn all_ranges(n: usize) -> BTreeSet<MinorRange> {
    let mut out = BTreeSet::new();
    for p in 1..=n {
        for q in p..=n {
            out.insert(MinorRange::new(p, q));
        }
    }
    out
}

/// Spectra of a set of principal minors at every retained time of a path.
#[derive(Debug, Clone)]
pub struct EigenPathSet {
    n: usize,
    ranges: Vec<MinorRange>,
    index: HashMap<MinorRange, usize>,
    times: Vec<f64>,
    /// `spectra[s][r]` for time index `s` and range position `r`.
    spectra: Vec<Vec<Spectrum>>,
    stopped_at: Option<f64>,
}

/// Diagonalizes every requested minor (plus [`required_ranges`]) at every
/// retained time of `path`. Empty ranges are ignored.
pub fn eigen_paths(path: &MatrixPath, ranges: &BTreeSet<MinorRange>) -> Result<EigenPathSet, DysonError> {
    let n = path.config.n;
    let mut all = required_ranges(n);
    for r in ranges {
        r.validate(n)?;
        if !r.is_empty() {
            all.insert(*r);
        }
    }
    let ranges: Vec<MinorRange> = all.into_iter().collect();
    let index = ranges.iter().enumerate().map(|(i, r)| (*r, i)).collect();
    let spectra = path
        .matrices
        .iter()
        .map(|h| {
            ranges
                .iter()
                .map(|r| Ok(eigenvalues(&h.minor(*r)?, PATH_EIG_TOL)?))
                .collect::<Result<Vec<_>, DysonError>>()
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(EigenPathSet {
        n,
        ranges,
        index,
        times: path.times.clone(),
        spectra,
        stopped_at: path.stopped_at,
    })
}

impl EigenPathSet {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn ranges(&self) -> &[MinorRange] {
        &self.ranges
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn stopped_at(&self) -> Option<f64> {
        self.stopped_at
    }

    pub fn spectrum(&self, s: usize, r: MinorRange) -> Option<&Spectrum> {
        self.index.get(&r).map(|&i| &self.spectra[s][i])
    }

    /// Full spectrum at time index `s`.
    pub fn full(&self, s: usize) -> &Spectrum {
        self.spectrum(s, MinorRange::full(self.n))
            .expect("full range is always tracked")
    }

    /// Eigenvalue path of the full matrix, one vector per retained time.
    pub fn full_paths(&self) -> Vec<Vec<f64>> {
        (0..self.len()).map(|s| self.full(s).values().to_vec()).collect()
    }

    /// Evaluator view at time index `s`; `h` must be the matrix at that time.
    pub fn state_at(&self, s: usize, h: &SymTridiag) -> Result<SpectralState, DysonError> {
        let n = self.n;
        let get = |r: MinorRange| {
            self.spectrum(s, r)
                .map(|sp| sp.values().to_vec())
                .ok_or(DysonError::MissingRange(r))
        };
        let mut leading = vec![Vec::new()];
        for m in 1..=n {
            leading.push(get(MinorRange::new(1, m))?);
        }
        let mut trailing = vec![Vec::new(); n + 2];
        for (m, slot) in trailing.iter_mut().enumerate().take(n + 1).skip(1) {
            *slot = get(MinorRange::new(m, n))?;
        }
        Ok(SpectralState {
            full: leading[n].clone(),
            leading,
            trailing,
            matrix: h.clone(),
        })
    }
}

/// Everything the SDE evaluators read at one time: the full spectrum, the
/// spectra of the leading and trailing minors, and the matrix itself.
#[derive(Debug, Clone)]
pub struct SpectralState {
    full: Vec<f64>,
    /// `leading[m]`: eigenvalues of `(1, m)`, `m = 0..=n`.
    leading: Vec<Vec<f64>>,
    /// `trailing[m]`: eigenvalues of `(m, n)`, `m = 1..=n+1`.
    trailing: Vec<Vec<f64>>,
    matrix: SymTridiag,
}

impl SpectralState {
    pub fn from_matrix(h: &SymTridiag, tol: f64) -> Result<Self, DysonError> {
        let n = h.n();
        let spec = |r: MinorRange| -> Result<Vec<f64>, DysonError> {
            Ok(eigenvalues(&h.minor(r)?, tol)?.values().to_vec())
        };
        let mut leading = vec![Vec::new()];
        for m in 1..=n {
            leading.push(spec(MinorRange::new(1, m))?);
        }
        let mut trailing = vec![Vec::new(); n + 2];
        for (m, slot) in trailing.iter_mut().enumerate().take(n + 1).skip(1) {
            *slot = if m == 1 {
                leading[n].clone()
            } else {
                spec(MinorRange::new(m, n))?
            };
        }
        Ok(Self {
            full: leading[n].clone(),
            leading,
            trailing,
            matrix: h.clone(),
        })
    }

    /// Replaces the full-matrix eigenvalues, keeping the minor spectra. The
    /// values are used in the order given.
    pub fn with_full(mut self, full: Vec<f64>) -> Result<Self, DysonError> {
        if full.len() != self.n() {
            return Err(DysonError::Domain(format!(
                "{} eigenvalues supplied for n = {}",
                full.len(),
                self.n()
            )));
        }
        self.full = full;
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.matrix.n()
    }

    pub fn full(&self) -> &[f64] {
        &self.full
    }

    pub fn matrix(&self) -> &SymTridiag {
        &self.matrix
    }

    /// The Bessel coordinates `X_k`, i.e. the off-diagonal.
    pub fn bessel_values(&self) -> &[f64] {
        self.matrix.offdiag()
    }

    /// Eigenvalues of a leading, trailing or empty minor.
    pub fn minor_roots(&self, r: MinorRange) -> Option<&[f64]> {
        let n = self.n();
        if r.validate(n).is_err() {
            return None;
        }
        if r.is_empty() {
            Some(&[])
        } else if r.p == 1 {
            Some(&self.leading[r.q])
        } else if r.q == n {
            Some(&self.trailing[r.p])
        } else {
            None
        }
    }

    pub(crate) fn leading_roots(&self, m: usize) -> &[f64] {
        &self.leading[m]
    }

    pub(crate) fn trailing_roots(&self, m: usize) -> &[f64] {
        &self.trailing[m]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::SQRT_2;

    #[test]
    fn initial_matrix_matches_config() {
        let c = SdeConfig::new(vec![2.0, 2.0], vec![1.0, 1.0], 1e-3, 0.01, 1);
        let p = simulate_matrix_path(&c, 0).unwrap();
        assert_eq!(p.matrices[0].diag(), &[0.0; 3]);
        assert_eq!(p.matrices[0].offdiag(), &[1.0, 1.0]);
        assert_eq!(p.len(), 11);
        assert!(p.stopped_at.is_none());
        let e = eigen_paths(&p, &BTreeSet::new()).unwrap();
        let full = e.full(0).values();
        for (x, y) in full.iter().zip([-SQRT_2, 0.0, SQRT_2]) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn two_by_two_starts_at_plus_minus_x() {
        let c = SdeConfig::new(vec![3.0], vec![1.0], 1e-3, 0.01, 1);
        let p = simulate_matrix_path(&c, 0).unwrap();
        let e = eigen_paths(&p, &BTreeSet::new()).unwrap();
        let v = e.full(0).values();
        assert!((v[0] + 1.0).abs() < 1e-12 && (v[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn diagonal_is_scaled_cumulative_noise() {
        let c = SdeConfig::new(vec![2.0, 2.0], vec![1.0, 1.0], 1e-2, 0.5, 3);
        let p = simulate_matrix_path(&c, 2).unwrap();
        let mut acc = [0.0; 3];
        for s in 0..p.noise.steps() {
            for (a, db) in acc.iter_mut().zip(p.noise.diag_row(s)) {
                *a += SQRT_2 * db;
            }
            for (x, y) in p.matrices[s + 1].diag().iter().zip(acc) {
                assert!((x - y).abs() < 1e-12);
            }
            assert!(p.bessel_values(s + 1).iter().all(|&x| x >= 0.0));
        }
    }

    #[test]
    fn dimension_two_never_truncates() {
        let c = SdeConfig::new(vec![2.0, 2.0], vec![1.0, 1.0], 1e-3, 1.0, 17);
        for i in 0..50 {
            assert!(simulate_matrix_path(&c, i).unwrap().stopped_at.is_none());
        }
    }

    #[test]
    fn absorption_truncates_before_hitting_time() {
        let c = SdeConfig::new(vec![0.5], vec![0.1], 1e-3, 1.0, 23);
        let mut stopped = 0;
        for i in 0..200 {
            let p = simulate_matrix_path(&c, i).unwrap();
            if let Some(t0) = p.stopped_at {
                stopped += 1;
                assert!(p.times.iter().all(|&t| t < t0 || (t == 0.0 && t0 == 0.0)));
                assert!(t0 - p.times.last().unwrap() <= c.dt);
            }
        }
        assert!(stopped > 10);
    }

    #[test]
    fn zero_noise_gives_constant_spectra() {
        let mut c = SdeConfig::new(vec![1.0, 1.0], vec![0.5, 2.0], 1e-2, 0.1, 0);
        c.diag0 = Some(vec![1.0, -1.0, 0.25]);
        let noise = NoiseGrid::zeros(c.steps(), 3, c.dt);
        let p = simulate_from_noise(&c, noise, &mut aux_rng(0, 0)).unwrap();
        let e = eigen_paths(&p, &all_ranges(3)).unwrap();
        for s in 1..e.len() {
            for r in e.ranges() {
                assert_eq!(e.spectrum(s, *r), e.spectrum(0, *r));
            }
        }
        let d = e.spectrum(4, MinorRange::new(3, 3)).unwrap().values();
        assert_eq!(d, &[0.25]);
    }

    #[test]
    fn non_simple_start_is_rejected() {
        let mut c = SdeConfig::new(vec![2.0, 2.0], vec![0.0, 0.0], 1e-2, 0.1, 0);
        assert!(matches!(simulate_matrix_path(&c, 0), Err(DysonError::Domain(_))));
        c.diag0 = Some(vec![0.0, 1.0, 2.0]);
        assert!(simulate_matrix_path(&c, 0).is_ok());
    }

    #[test]
    fn mismatched_noise_is_rejected() {
        let c = SdeConfig::new(vec![2.0], vec![1.0], 1e-2, 0.1, 0);
        let noise = NoiseGrid::zeros(5, 2, c.dt);
        assert!(simulate_from_noise(&c, noise, &mut aux_rng(0, 0)).is_err());
    }

    #[test]
    fn state_matches_direct_minor_spectra() {
        let h = SymTridiag::new(vec![0.3, -1.0, 2.0, 0.5], vec![1.0, 0.7, 1.3]).unwrap();
        let st = SpectralState::from_matrix(&h, 1e-14).unwrap();
        let r = MinorRange::new(2, 4);
        let direct = eigenvalues(&h.minor(r).unwrap(), 1e-14).unwrap();
        assert_eq!(st.minor_roots(r).unwrap(), direct.values());
        assert_eq!(st.minor_roots(MinorRange::new(5, 4)).unwrap(), &[] as &[f64]);
        assert!(st.minor_roots(MinorRange::new(2, 3)).is_none());
    }
}
