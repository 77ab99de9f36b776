use serde::Serialize;
use tridyson::identities::{run_exact_suite, run_float_suite, IdentityReport};

use super::{ensure_dir, write_report, Check, CliError, Manifest, Outcome, RunOptions};

#[derive(Debug, Serialize)]
struct Data<'a> {
    count: usize,
    max_size: usize,
    reports: &'a [IdentityReport],
}

/// Randomized certification of the determinant identities: every exact
/// identity over `count` rational instances with sizes up to `max_size`,
/// plus the floating-point root checks.
pub fn verify_identities(opts: &RunOptions, count: usize, max_size: usize) -> Result<Outcome, CliError> {
    if count == 0 || max_size < 2 {
        return Err(CliError::Usage("need --count >= 1 and --max-size >= 2".into()));
    }
    let seed = opts.seed.unwrap_or(0);
    let settings = format!("count = {count}\nmax_size = {max_size}\nseed = {seed}\n");
    let manifest = Manifest::start("verify-identities", seed, settings);
    ensure_dir(&opts.out)?;

    let (mut reports, float) = super::pool(opts.threads)?.install(|| {
        rayon::join(
            || run_exact_suite(seed, count, max_size),
            || run_float_suite(seed.wrapping_add(1), count, max_size.max(8)),
        )
    });
    reports.extend(float);

    let mut checks = Vec::new();
    for r in &reports {
        checks.push(Check::at_most(
            format!("{} ({} instances)", r.name, r.instances),
            r.failure_count as f64,
            0.0,
        ));
        if r.name == "zero-pattern-scope" {
            checks.push(Check::at_least(
                "zero-pattern-scope literal counterexamples",
                r.scope_counterexamples.len() as f64,
                1.0,
            ));
        }
    }
    let data = Data {
        count,
        max_size,
        reports: &reports,
    };
    let file = write_report(
        &opts.out,
        "verify_identities.json",
        "verify-identities",
        seed,
        &checks,
        &data,
    )?;
    manifest.finish(
        &opts.out,
        vec![file.clone()],
        &checks,
        vec![format!("report: {}", file.display())],
    )
}
