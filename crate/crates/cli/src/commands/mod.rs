//! Subcommand implementations. Each one reads its settings, fans path or
//! sample work out to a thread pool, writes its outputs serially into the
//! output directory, and reports whether every enabled check passed.

mod collision;
mod gbe;
mod identities;
mod simulate;
mod verify_sde;

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use thiserror::Error;

use crate::config::{ConfigError, ConfigFile};
use crate::trajectory::TrajectoryError;

pub use collision::collision_study;
pub use gbe::gbe;
pub use identities::verify_identities;
pub use simulate::simulate;
pub use verify_sde::verify_sde;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("config: {0}")]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Trajectory(#[from] TrajectoryError),
    #[error(transparent)]
    Dyson(#[from] tridyson::dyson::DysonError),
    #[error(transparent)]
    Gbe(#[from] tridyson::gbe::GbeError),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error("{0}")]
    Usage(String),
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Flags shared by every subcommand.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOptions {
    pub config: Option<PathBuf>,
    pub out: PathBuf,
    pub threads: Option<usize>,
    pub seed: Option<u64>,
}

/// What a command produced.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub passed: bool,
    pub files: Vec<PathBuf>,
    /// Human-readable summary, one line per check or artifact.
    pub lines: Vec<String>,
}

/// One pass/fail decision with the number it was made on.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub measured: f64,
    pub threshold: f64,
    pub detail: String,
}

impl Check {
    pub fn at_most(name: impl Into<String>, measured: f64, threshold: f64) -> Self {
        Self::new(
            name,
            measured <= threshold,
            measured,
            threshold,
            "measured <= threshold",
        )
    }

    pub fn below(name: impl Into<String>, measured: f64, threshold: f64) -> Self {
        Self::new(
            name,
            measured < threshold,
            measured,
            threshold,
            "measured < threshold",
        )
    }

    pub fn at_least(name: impl Into<String>, measured: f64, threshold: f64) -> Self {
        Self::new(
            name,
            measured >= threshold,
            measured,
            threshold,
            "measured >= threshold",
        )
    }

    pub fn new(
        name: impl Into<String>,
        passed: bool,
        measured: f64,
        threshold: f64,
        detail: impl Into<String>,
    ) -> Self {
        Self {
            name: name.into(),
            passed,
            measured,
            threshold,
            detail: detail.into(),
        }
    }

    fn line(&self) -> String {
        format!(
            "{} {}: {:e} (threshold {:e}; {})",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.measured,
            self.threshold,
            self.detail
        )
    }
}

/// Top-level JSON document of every report.
#[derive(Debug, Serialize)]
pub struct Report<'a, T: Serialize> {
    pub command: &'a str,
    pub version: &'a str,
    pub seed: u64,
    pub passed: bool,
    pub checks: &'a [Check],
    pub data: T,
}

pub(crate) fn load_config(opts: &RunOptions) -> Result<ConfigFile, CliError> {
    let path = opts
        .config
        .as_ref()
        .ok_or_else(|| CliError::Usage("this command needs --config PATH".into()))?;
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    let mut cfg: ConfigFile = text.parse()?;
    if let Some(s) = opts.seed {
        cfg.set("seed", s.to_string());
    }
    Ok(cfg)
}

pub(crate) fn pool(threads: Option<usize>) -> Result<rayon::ThreadPool, CliError> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(k) = threads {
        if k == 0 {
            return Err(CliError::Usage("--threads must be at least 1".into()));
        }
        b = b.num_threads(k);
    }
    b.build().map_err(|e| CliError::Usage(e.to_string()))
}

pub(crate) fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(io_err(dir))
}

pub(crate) fn write_file(path: &Path, bytes: &[u8]) -> Result<PathBuf, CliError> {
    fs::write(path, bytes).map_err(io_err(path))?;
    Ok(path.to_path_buf())
}

pub(crate) fn write_report<T: Serialize>(
    out: &Path,
    file: &str,
    command: &str,
    seed: u64,
    checks: &[Check],
    data: T,
) -> Result<PathBuf, CliError> {
    let report = Report {
        command,
        version: VERSION,
        seed,
        passed: checks.iter().all(|c| c.passed),
        checks,
        data,
    };
    let mut text = serde_json::to_string_pretty(&report)?;
    text.push('\n');
    write_file(&out.join(file), text.as_bytes())
}

fn unix_now() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map_or(0, |d| d.as_secs())
}

/// Plain-text record of a run. Everything except the two timestamps is
/// determined by the command line and the config file.
pub(crate) struct Manifest {
    pub command: &'static str,
    pub seed: u64,
    pub settings: String,
    pub started: u64,
}

impl Manifest {
    pub fn start(command: &'static str, seed: u64, settings: String) -> Self {
        Self {
            command,
            seed,
            settings,
            started: unix_now(),
        }
    }

    /// Writes `<command>.manifest.txt` listing `files` and returns the
    /// finished outcome.
    pub fn finish(
        self,
        out: &Path,
        mut files: Vec<PathBuf>,
        checks: &[Check],
        mut lines: Vec<String>,
    ) -> Result<Outcome, CliError> {
        let mut text = format!(
            "tool = tridyson {VERSION}\ncommand = {}\nseed = {}\nstarted_unix = {}\nfinished_unix = {}\n\n[config]\n{}\n[outputs]\n",
            self.command,
            self.seed,
            self.started,
            unix_now(),
            self.settings
        );
        for f in &files {
            let name = f
                .file_name()
                .map_or_else(|| f.display().to_string(), |s| s.to_string_lossy().into_owned());
            text.push_str(&name);
            text.push('\n');
        }
        let path = out.join(format!("{}.manifest.txt", self.command));
        files.push(write_file(&path, text.as_bytes())?);
        let passed = checks.iter().all(|c| c.passed);
        lines.extend(checks.iter().map(Check::line));
        let verdict = match (checks.is_empty(), passed) {
            (true, _) => "done",
            (false, true) => "all checks passed",
            (false, false) => "some checks FAILED",
        };
        lines.push(format!("{}: {verdict}", self.command));
        Ok(Outcome { passed, files, lines })
    }
}
