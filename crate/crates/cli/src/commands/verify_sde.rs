use rayon::prelude::*;
use serde::Serialize;
use tridyson::dyson::study::{
    convergence_pair, qv_sample, scan_path, ConvergencePoint, PathScan, QvSample, QvSummary,
};
use tridyson::dyson::{
    all_ranges, default_eps_col, detect_collisions, eigen_paths, interlacing_summary, simulate_matrix_path,
    DysonError,
};
use tridyson::sde::Scheme;

use super::{ensure_dir, load_config, pool, write_report, Check, CliError, Manifest, Outcome, RunOptions};

pub const IDEN_RESIDUAL_MAX: f64 = 1e-8;
pub const COEFF_BOUND: f64 = 1.0 + 1e-10;
pub const FRACTION_SLACK: f64 = 1e-10;
pub const TRACKING_MAX: f64 = 0.05;
/// Fraction of paths whose tracking error must shrink when `dt` halves.
pub const REDUCTION_FRACTION: f64 = 0.9;
pub const QV_DIAG_REL: f64 = 0.1;
pub const QV_CROSS_Z: f64 = 3.0;
/// For `n = 2`: `|<lambda_1, lambda_2>_T| <= 0.05 T`.
pub const QV_CROSS_ABS_REL: f64 = 0.05;

#[derive(Debug, Serialize)]
struct CollisionSummary {
    paths: usize,
    absorbed: usize,
    collided: usize,
    collided_interior: usize,
    min_gap: f64,
    interlacing_violations: usize,
    interlacing_pairs: usize,
}

#[derive(Debug, Serialize)]
struct Data {
    scan: PathScan,
    convergence: Option<Vec<ConvergencePoint>>,
    qv: Option<QvSummary>,
    qv_excluded_paths: usize,
    collisions: CollisionSummary,
}

struct PathResult {
    scan: PathScan,
    qv: Option<QvSample>,
    absorbed: bool,
    collided: bool,
    collided_interior: bool,
    min_gap: f64,
    violations: usize,
    pairs: usize,
}

/// Pathwise comparisons of the eigenvalue SDE against direct
/// diagonalization of simulated matrix paths.
pub fn verify_sde(opts: &RunOptions) -> Result<Outcome, CliError> {
    let cfg = load_config(opts)?;
    let sde = cfg.sde_config()?;
    let paths = cfg.usize("paths")?;
    let eps = cfg.eps_col()?;
    if paths == 0 {
        return Err(CliError::Usage("paths must be at least 1".into()));
    }
    let manifest = Manifest::start("verify-sde", sde.seed, cfg.render());
    ensure_dir(&opts.out)?;
    let n = sde.n;
    let ranges = all_ranges(n);
    let pool = pool(opts.threads)?;

    let results = pool.install(|| {
        (0..paths as u64)
            .into_par_iter()
            .map(|i| -> Result<PathResult, CliError> {
                let p = simulate_matrix_path(&sde, i)?;
                let scan = scan_path(&p)?;
                let qv = match qv_sample(&p) {
                    Ok(q) => Some(q),
                    Err(DysonError::Collision { .. }) => None,
                    Err(e) => return Err(e.into()),
                };
                let e = eigen_paths(&p, &ranges)?;
                let rep = detect_collisions(&e, eps.unwrap_or_else(|| default_eps_col(&e)))?;
                let il = interlacing_summary(&e, true);
                Ok(PathResult {
                    scan,
                    qv,
                    absorbed: p.stopped_at.is_some(),
                    collided: rep.t_col_all.is_some(),
                    collided_interior: rep.t_col.is_some(),
                    min_gap: rep.min_gap,
                    violations: il.violations,
                    pairs: il.pairs_checked,
                })
            })
            .collect::<Result<Vec<_>, _>>()
    })?;

    let convergence = if sde.scheme == Scheme::EulerMaruyama {
        Some(pool.install(|| {
            (0..paths as u64)
                .into_par_iter()
                .map(|i| convergence_pair(&sde, i))
                .collect::<Result<Vec<_>, _>>()
        })?)
    } else {
        None
    };

    let mut scan = PathScan::default();
    for r in &results {
        scan.merge(&r.scan);
    }
    let samples: Vec<QvSample> = results.iter().filter_map(|r| r.qv.clone()).collect();
    let qv = (!samples.is_empty()).then(|| QvSummary::from_samples(&samples));
    let collisions = CollisionSummary {
        paths,
        absorbed: results.iter().filter(|r| r.absorbed).count(),
        collided: results.iter().filter(|r| r.collided).count(),
        collided_interior: results.iter().filter(|r| r.collided_interior).count(),
        min_gap: results.iter().map(|r| r.min_gap).fold(f64::INFINITY, f64::min),
        interlacing_violations: results.iter().map(|r| r.violations).sum(),
        interlacing_pairs: results.iter().map(|r| r.pairs).sum(),
    };

    let mut checks = vec![
        Check::at_most("iden_residual", scan.max_iden_residual, IDEN_RESIDUAL_MAX),
        Check::below(
            "coefficient_bound",
            scan.max_normalized_diag.max(scan.max_normalized_off),
            COEFF_BOUND,
        ),
    ];
    if scan.times > 0 {
        let spill = (-scan.min_f_fraction).max(scan.max_f_fraction - 1.0).max(0.0);
        checks.push(Check::at_most(
            "f_fraction_in_unit_interval",
            spill,
            FRACTION_SLACK,
        ));
    }
    let mut lines = Vec::new();
    if let Some(points) = &convergence {
        let worst = points.iter().map(|p| p.coarse_error).fold(0.0, f64::max);
        checks.push(Check::at_most("tracking_error", worst, TRACKING_MAX));
        let reduced = points.iter().filter(|p| p.reduced()).count();
        let need = (REDUCTION_FRACTION * paths as f64).ceil();
        checks.push(Check::new(
            "tracking_converges",
            reduced as f64 >= need,
            reduced as f64,
            need,
            format!("paths (of {paths}) whose error shrinks when dt halves"),
        ));
    } else {
        lines.push("tracking comparison skipped: it needs scheme = euler_maruyama".to_string());
    }
    if let Some(q) = &qv {
        for i in 0..n {
            checks.push(Check::at_most(
                format!("qv_diag_{}", i + 1),
                q.diag_rel_error(i),
                QV_DIAG_REL,
            ));
            for j in (i + 1)..n {
                checks.push(Check::at_most(
                    format!("qv_cross_{}_{}", i + 1, j + 1),
                    q.z_score(i, j),
                    QV_CROSS_Z,
                ));
            }
        }
        if n == 2 {
            checks.push(Check::at_most(
                "qv_cross_abs",
                q.mean_realized[0][1].abs(),
                QV_CROSS_ABS_REL * q.mean_horizon,
            ));
        }
    }
    if sde.alpha.iter().all(|&a| a >= 2.0) && sde.x0.iter().all(|&x| x > 0.0) {
        checks.push(Check::at_most("no_absorption", collisions.absorbed as f64, 0.0));
        checks.push(Check::at_most("no_collision", collisions.collided as f64, 0.0));
        checks.push(Check::at_most(
            "strict_interlacing",
            collisions.interlacing_violations as f64,
            0.0,
        ));
    }

    let data = Data {
        scan,
        convergence,
        qv,
        qv_excluded_paths: paths - samples.len(),
        collisions,
    };
    let file = write_report(
        &opts.out,
        "verify_sde.json",
        "verify-sde",
        sde.seed,
        &checks,
        &data,
    )?;
    lines.push(format!("report: {}", file.display()));
    manifest.finish(&opts.out, vec![file], &checks, lines)
}
