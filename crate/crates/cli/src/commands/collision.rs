use std::fmt::Write as _;

use rayon::prelude::*;
use serde::Serialize;
use tridyson::dyson::{all_ranges, default_eps_col, detect_collisions, eigen_paths, simulate_matrix_path};
use tridyson::sde::SdeConfig;

use super::{
    ensure_dir, load_config, pool, write_file, write_report, Check, CliError, Manifest, Outcome, RunOptions,
};

#[derive(Debug, Clone, Serialize)]
struct Row {
    alpha: f64,
    paths: usize,
    absorbed: usize,
    /// Paths where some minor, 2x2 ones included, came within `eps_col`.
    collided: usize,
    /// Same, counting only minors of size at least 3.
    collided_interior: usize,
    /// Paths stopped by a collision of a larger minor or by absorption.
    stopped: usize,
    min_gap: f64,
}

/// Collision and absorption frequencies as the common Bessel dimension
/// sweeps `alpha_grid`.
pub fn collision_study(opts: &RunOptions) -> Result<Outcome, CliError> {
    let cfg = load_config(opts)?;
    let n = cfg.usize("n")?;
    let x0 = cfg.f64_list("x0")?;
    let dt = cfg.f64("dt")?;
    let t_end = cfg.f64("t_end")?;
    let paths = cfg.usize("paths")?;
    let seed = cfg.u64("seed")?;
    let scheme = cfg.scheme()?;
    let eps = cfg.eps_col()?;
    let grid = cfg.f64_list("alpha_grid")?;
    if grid.is_empty() {
        return Err(CliError::Usage("alpha_grid is empty".into()));
    }
    let manifest = Manifest::start("collision-study", seed, cfg.render());
    ensure_dir(&opts.out)?;
    let ranges = all_ranges(n);
    let pool = pool(opts.threads)?;

    let mut rows = Vec::new();
    for &a in &grid {
        let mut sde = SdeConfig::new(vec![a; n.saturating_sub(1)], x0.clone(), dt, t_end, seed);
        sde.n = n;
        sde.scheme = scheme;
        sde.validate().map_err(|e| CliError::Usage(e.to_string()))?;
        let per_path = pool.install(|| {
            (0..paths as u64)
                .into_par_iter()
                .map(|i| -> Result<_, CliError> {
                    let p = simulate_matrix_path(&sde, i)?;
                    let e = eigen_paths(&p, &ranges)?;
                    let r = detect_collisions(&e, eps.unwrap_or_else(|| default_eps_col(&e)))?;
                    Ok((
                        p.stopped_at.is_some(),
                        r.t_col_all.is_some(),
                        r.t_col.is_some(),
                        r.t_col0.is_some(),
                        r.min_gap,
                    ))
                })
                .collect::<Result<Vec<_>, _>>()
        })?;
        rows.push(Row {
            alpha: a,
            paths,
            absorbed: per_path.iter().filter(|r| r.0).count(),
            collided: per_path.iter().filter(|r| r.1).count(),
            collided_interior: per_path.iter().filter(|r| r.2).count(),
            stopped: per_path.iter().filter(|r| r.3).count(),
            min_gap: per_path.iter().map(|r| r.4).fold(f64::INFINITY, f64::min),
        });
    }

    let mut csv = String::from("alpha,paths,absorbed,absorbed_fraction,collided,collided_fraction,collided_interior,stopped,stopped_fraction,min_gap\n");
    for r in &rows {
        let frac = |k: usize| k as f64 / r.paths.max(1) as f64;
        let _ = writeln!(
            csv,
            "{:.16e},{},{},{:.16e},{},{:.16e},{},{},{:.16e},{:.16e}",
            r.alpha,
            r.paths,
            r.absorbed,
            frac(r.absorbed),
            r.collided,
            frac(r.collided),
            r.collided_interior,
            r.stopped,
            frac(r.stopped),
            r.min_gap
        );
    }
    let csv_file = write_file(&opts.out.join("collision_study.csv"), csv.as_bytes())?;

    // Above the threshold dimension with a positive start nothing may stop.
    let checks: Vec<Check> = if x0.iter().all(|&x| x > 0.0) {
        rows.iter()
            .filter(|r| r.alpha >= 2.0)
            .map(|r| Check::at_most(format!("no_stop_alpha_{}", r.alpha), r.stopped as f64, 0.0))
            .collect()
    } else {
        Vec::new()
    };
    let json = write_report(
        &opts.out,
        "collision_study.json",
        "collision-study",
        seed,
        &checks,
        &rows,
    )?;
    let lines = rows
        .iter()
        .map(|r| {
            format!(
                "alpha {}: absorbed {}/{}, stopped {}/{}, min gap {:e}",
                r.alpha, r.absorbed, r.paths, r.stopped, r.paths, r.min_gap
            )
        })
        .collect();
    manifest.finish(&opts.out, vec![csv_file, json], &checks, lines)
}
