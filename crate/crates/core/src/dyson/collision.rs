use serde::Serialize;

use super::{DysonError, EigenPathSet};
use crate::eig::{check_interlacing, default_gap_tol};
use crate::tridiag::MinorRange;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RangeCollision {
    pub range: MinorRange,
    /// First grid time with a gap below `eps_col`.
    pub first_time: Option<f64>,
    pub min_gap: f64,
}

/// First-collision summary for one path.
///
/// `t_col` follows the convention that only minors with `q - p > 1` count
/// (a 2x2 minor can only degenerate when its off-diagonal hits zero, which
/// is the Bessel hitting time); `t_col_all` includes the 2x2 minors.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CollisionReport {
    pub eps_col: f64,
    pub ranges: Vec<RangeCollision>,
    pub t_col_all: Option<f64>,
    pub t_col: Option<f64>,
    pub t0: Option<f64>,
    /// `min(t_col, t0)`.
    pub t_col0: Option<f64>,
    /// Smallest gap over every tracked minor and time.
    pub min_gap: f64,
}

impl CollisionReport {
    pub fn collided(&self) -> bool {
        self.t_col_all.is_some()
    }
}

fn min_opt(a: Option<f64>, b: Option<f64>) -> Option<f64> {
    match (a, b) {
        (Some(x), Some(y)) => Some(x.min(y)),
        (x, None) => x,
        (None, y) => y,
    }
}

/// `1e-7` times the diameter of the initial full spectrum.
pub fn default_eps_col(eigs: &EigenPathSet) -> f64 {
    let d = if eigs.is_empty() {
        0.0
    } else {
        eigs.full(0).diameter()
    };
    1e-7 * if d > 0.0 { d } else { 1.0 }
}

pub fn detect_collisions(eigs: &EigenPathSet, eps_col: f64) -> Result<CollisionReport, DysonError> {
    if !(eps_col > 0.0 && eps_col.is_finite()) {
        return Err(DysonError::Domain(format!(
            "eps_col = {eps_col} must be positive"
        )));
    }
    let mut ranges = Vec::new();
    let mut t_col_all = None;
    let mut t_col = None;
    let mut min_gap = f64::INFINITY;
    for &r in eigs.ranges().iter().filter(|r| r.len() >= 2) {
        let mut first_time = None;
        let mut range_gap = f64::INFINITY;
        for (s, &t) in eigs.times().iter().enumerate() {
            let gap = eigs.spectrum(s, r).expect("tracked range").min_gap();
            range_gap = range_gap.min(gap);
            if first_time.is_none() && gap < eps_col {
                first_time = Some(t);
            }
        }
        min_gap = min_gap.min(range_gap);
        t_col_all = min_opt(t_col_all, first_time);
        if r.q - r.p > 1 {
            t_col = min_opt(t_col, first_time);
        }
        ranges.push(RangeCollision {
            range: r,
            first_time,
            min_gap: range_gap,
        });
    }
    let t0 = eigs.stopped_at();
    Ok(CollisionReport {
        eps_col,
        ranges,
        t_col_all,
        t_col,
        t0,
        t_col0: min_opt(t_col, t0),
        min_gap,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InterlacingSummary {
    pub pairs_checked: usize,
    pub violations: usize,
    pub min_margin: f64,
    /// `(time, outer, inner)` of the first failure.
    pub first_violation: Option<(f64, MinorRange, MinorRange)>,
}

impl InterlacingSummary {
    pub fn holds(&self) -> bool {
        self.violations == 0
    }
}

/// Checks interlacing between every tracked minor `(p, q)` and its tracked
/// one-smaller minors `(p, q-1)` and `(p+1, q)` at every time. The strict
/// margin is [`default_gap_tol`] of the outer spectrum.
pub fn interlacing_summary(eigs: &EigenPathSet, strict: bool) -> InterlacingSummary {
    let mut out = InterlacingSummary {
        pairs_checked: 0,
        violations: 0,
        min_margin: f64::INFINITY,
        first_violation: None,
    };
    for &outer in eigs.ranges().iter().filter(|r| r.len() >= 2) {
        let inners = [
            MinorRange::new(outer.p, outer.q - 1),
            MinorRange::new(outer.p + 1, outer.q),
        ];
        for inner in inners {
            for (s, &t) in eigs.times().iter().enumerate() {
                let (Some(a), Some(b)) = (eigs.spectrum(s, outer), eigs.spectrum(s, inner)) else {
                    continue;
                };
                let rep = check_interlacing(a, b, strict, default_gap_tol(a)).expect("sizes differ by one");
                out.pairs_checked += 1;
                out.min_margin = out.min_margin.min(rep.min_margin);
                if !rep.holds {
                    out.violations += 1;
                    out.first_violation.get_or_insert((t, outer, inner));
                }
            }
        }
    }
    out
}
