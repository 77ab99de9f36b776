use std::collections::BTreeSet;

use rayon::prelude::*;
use tridyson::dyson::{eigen_paths, simulate_matrix_path};

use super::{ensure_dir, load_config, pool, write_file, CliError, Manifest, Outcome, RunOptions};
use crate::trajectory::write_trajectory;

/// Writes `path_NNNN.csv` for every path: the full spectrum and the
/// requested minor spectra at each retained time.
pub fn simulate(opts: &RunOptions) -> Result<Outcome, CliError> {
    let cfg = load_config(opts)?;
    let sde = cfg.sde_config()?;
    let paths = cfg.usize("paths")?;
    let minors = cfg.ranges(sde.n)?;
    let manifest = Manifest::start("simulate", sde.seed, cfg.render());
    ensure_dir(&opts.out)?;

    let tracked: BTreeSet<_> = minors.iter().copied().collect();
    let csvs = pool(opts.threads)?.install(|| {
        (0..paths as u64)
            .into_par_iter()
            .map(|i| -> Result<(Vec<u8>, Option<f64>), CliError> {
                let path = simulate_matrix_path(&sde, i)?;
                let eigs = eigen_paths(&path, &tracked)?;
                let mut buf = Vec::new();
                write_trajectory(&mut buf, &eigs, &minors)?;
                Ok((buf, path.stopped_at))
            })
            .collect::<Result<Vec<_>, _>>()
    })?;

    let mut files = Vec::new();
    let mut lines = Vec::new();
    for (i, (bytes, stopped)) in csvs.iter().enumerate() {
        let f = write_file(&opts.out.join(format!("path_{i:04}.csv")), bytes)?;
        if let Some(t) = stopped {
            lines.push(format!("{}: truncated at Bessel hitting time {t:e}", f.display()));
        }
        files.push(f);
    }
    lines.push(format!(
        "wrote {} trajectories to {}",
        files.len(),
        opts.out.display()
    ));
    manifest.finish(&opts.out, files, &[], lines)
}
