use serde::Serialize;
use tridyson::gbe::{
    time_slice_check, trace_moment_check, GbeConfig, TimeSliceReport, TraceMomentReport, SLICE_Z, TRACE_Z,
};

use super::{ensure_dir, load_config, write_report, Check, CliError, Manifest, Outcome, RunOptions};

#[derive(Debug, Serialize)]
struct Data {
    trace: TraceMomentReport,
    time_slice: TimeSliceReport,
}

/// Ensemble moment checks and the time-1 comparison with the matrix
/// process.
pub fn gbe(opts: &RunOptions) -> Result<Outcome, CliError> {
    let cfg = load_config(opts)?;
    let g = GbeConfig {
        n: cfg.usize("n")?,
        beta: cfg.f64("beta")?,
        samples: cfg.usize("samples")?,
        seed: cfg.u64("seed")?,
    };
    g.validate()?;
    let manifest = Manifest::start("gbe", g.seed, cfg.render());
    ensure_dir(&opts.out)?;
    let (trace, time_slice) = super::pool(opts.threads)?.install(|| {
        rayon::join(
            || trace_moment_check(&g),
            || time_slice_check(g.n, g.beta, g.samples, g.seed),
        )
    });
    let (trace, time_slice) = (trace?, time_slice?);
    let worst = time_slice.comparisons.iter().map(|c| c.z).fold(0.0, f64::max);
    let checks = vec![
        Check::at_most("trace_square_moment_z", trace.z, TRACE_Z),
        Check::at_most(
            format!("time_slice_max_z ({} comparisons)", time_slice.comparisons.len()),
            worst,
            SLICE_Z,
        ),
    ];
    let file = write_report(
        &opts.out,
        "gbe.json",
        "gbe",
        g.seed,
        &checks,
        Data { trace, time_slice },
    )?;
    manifest.finish(
        &opts.out,
        vec![file.clone()],
        &checks,
        vec![format!("report: {}", file.display())],
    )
}
