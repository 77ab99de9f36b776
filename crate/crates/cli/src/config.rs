//! Flat `key = value` configuration files.
//!
//! One setting per line; `#` starts a comment. Keys must come from [`KEYS`],
//! may appear once, and each command states which keys it needs. A needed
//! key that is absent is an error naming its documented default.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::str::FromStr;

use thiserror::Error;
use tridyson::sde::{Scheme, SdeConfig};
use tridyson::MinorRange;

use crate::ranges::{parse_ranges, RangeSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct KeySpec {
    pub name: &'static str,
    pub default: &'static str,
    pub doc: &'static str,
}

/// Every recognized key with its documented default.
pub const KEYS: &[KeySpec] = &[
    KeySpec {
        name: "n",
        default: "3",
        doc: "matrix size",
    },
    KeySpec {
        name: "alpha",
        default: "3,3",
        doc: "Bessel dimensions, n - 1 comma-separated values",
    },
    KeySpec {
        name: "x0",
        default: "1,1",
        doc: "Bessel starting points, n - 1 comma-separated values",
    },
    KeySpec {
        name: "diag0",
        default: "0,...,0",
        doc: "optional initial diagonal, n values",
    },
    KeySpec {
        name: "dt",
        default: "1e-3",
        doc: "time step",
    },
    KeySpec {
        name: "t_end",
        default: "1",
        doc: "time horizon",
    },
    KeySpec {
        name: "paths",
        default: "20",
        doc: "number of simulated paths",
    },
    KeySpec {
        name: "seed",
        default: "0",
        doc: "master seed",
    },
    KeySpec {
        name: "scheme",
        default: "euler_maruyama",
        doc: "euler_maruyama or exact_squared_bessel",
    },
    KeySpec {
        name: "eps_col",
        default: "auto",
        doc: "collision threshold; auto is 1e-7 times the initial spectral diameter",
    },
    KeySpec {
        name: "ranges",
        default: "none",
        doc: "extra minor ranges p:q, comma-separated, or all / none",
    },
    KeySpec {
        name: "alpha_grid",
        default: "0.5,1,1.5,2,3",
        doc: "dimensions swept by collision-study, applied to every off-diagonal",
    },
    KeySpec {
        name: "beta",
        default: "1",
        doc: "ensemble parameter",
    },
    KeySpec {
        name: "samples",
        default: "10000",
        doc: "ensemble sample count",
    },
];

pub fn key_spec(name: &str) -> Option<&'static KeySpec> {
    KEYS.iter().find(|k| k.name == name)
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("line {line}: expected `key = value`")]
    Syntax { line: usize },
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: key `{key}` already set on line {first}")]
    Duplicate { line: usize, key: String, first: usize },
    #[error("missing key `{key}` (documented default: {default})")]
    Missing { key: String, default: String },
    #[error("line {line}: bad value for `{key}`: {msg}")]
    Value { line: usize, key: String, msg: String },
    #[error("{0}")]
    Inconsistent(String),
}

#[derive(Debug, Clone, PartialEq)]
struct Setting {
    value: String,
    line: usize,
}

/// A parsed but not yet interpreted configuration file.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ConfigFile {
    settings: BTreeMap<String, Setting>,
}

impl FromStr for ConfigFile {
    type Err = ConfigError;

    fn from_str(text: &str) -> Result<Self, ConfigError> {
        let mut settings: BTreeMap<String, Setting> = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let body = raw.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let (key, value) = body.split_once('=').ok_or(ConfigError::Syntax { line })?;
            let key = key.trim();
            if key.is_empty() {
                return Err(ConfigError::Syntax { line });
            }
            if key_spec(key).is_none() {
                return Err(ConfigError::UnknownKey {
                    line,
                    key: key.to_string(),
                });
            }
            if let Some(prev) = settings.get(key) {
                return Err(ConfigError::Duplicate {
                    line,
                    key: key.to_string(),
                    first: prev.line,
                });
            }
            settings.insert(
                key.to_string(),
                Setting {
                    value: value.trim().to_string(),
                    line,
                },
            );
        }
        Ok(Self { settings })
    }
}

impl ConfigFile {
    pub fn get(&self, key: &str) -> Option<&str> {
        self.settings.get(key).map(|s| s.value.as_str())
    }

    /// Sets or replaces a key, as a `--seed` style override does.
    pub fn set(&mut self, key: &str, value: impl Into<String>) {
        let line = self.settings.get(key).map_or(0, |s| s.line);
        self.settings.insert(
            key.to_string(),
            Setting {
                value: value.into(),
                line,
            },
        );
    }

    /// Canonical text: one `key = value` line per setting, in key order.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for (k, s) in &self.settings {
            let _ = writeln!(out, "{k} = {}", s.value);
        }
        out
    }

    fn require(&self, key: &str) -> Result<&Setting, ConfigError> {
        self.settings.get(key).ok_or_else(|| ConfigError::Missing {
            key: key.to_string(),
            default: key_spec(key).map_or("none", |k| k.default).to_string(),
        })
    }

    fn parse_with<T>(&self, key: &str, f: impl FnOnce(&str) -> Result<T, String>) -> Result<T, ConfigError> {
        let s = self.require(key)?;
        f(&s.value).map_err(|msg| ConfigError::Value {
            line: s.line,
            key: key.to_string(),
            msg,
        })
    }

    pub fn f64(&self, key: &str) -> Result<f64, ConfigError> {
        self.parse_with(key, parse_f64)
    }

    pub fn usize(&self, key: &str) -> Result<usize, ConfigError> {
        self.parse_with(key, |v| v.parse::<usize>().map_err(|e| e.to_string()))
    }

    pub fn u64(&self, key: &str) -> Result<u64, ConfigError> {
        self.parse_with(key, |v| v.parse::<u64>().map_err(|e| e.to_string()))
    }

    /// Comma-separated reals; an empty value is the empty list.
    pub fn f64_list(&self, key: &str) -> Result<Vec<f64>, ConfigError> {
        self.parse_with(key, parse_f64_list)
    }

    pub fn scheme(&self) -> Result<Scheme, ConfigError> {
        self.parse_with("scheme", |v| v.parse::<Scheme>().map_err(|e| e.to_string()))
    }

    /// `None` for `auto`.
    pub fn eps_col(&self) -> Result<Option<f64>, ConfigError> {
        self.parse_with("eps_col", |v| {
            if v == "auto" {
                return Ok(None);
            }
            let x = parse_f64(v)?;
            if x > 0.0 {
                Ok(Some(x))
            } else {
                Err(format!("{x} must be positive"))
            }
        })
    }

    pub fn ranges(&self, n: usize) -> Result<Vec<MinorRange>, ConfigError> {
        let s = self.require("ranges")?;
        let err = |msg: String| ConfigError::Value {
            line: s.line,
            key: "ranges".into(),
            msg,
        };
        match parse_ranges(&s.value).map_err(|e| err(e.to_string()))? {
            RangeSpec::All => Ok((1..=n)
                .flat_map(|p| (p..=n).map(move |q| MinorRange::new(p, q)))
                .collect()),
            RangeSpec::List(v) => {
                if let Some(r) = v.iter().find(|r| r.q > n) {
                    return Err(err(format!("range {r} exceeds n = {n}")));
                }
                Ok(v)
            }
        }
    }

    /// The process settings shared by the simulation commands. `diag0` is
    /// the only optional key.
    pub fn sde_config(&self) -> Result<SdeConfig, ConfigError> {
        let n = self.usize("n")?;
        let alpha = self.f64_list("alpha")?;
        let x0 = self.f64_list("x0")?;
        let mut c = SdeConfig::new(alpha, x0, self.f64("dt")?, self.f64("t_end")?, self.u64("seed")?);
        if c.n != n {
            return Err(ConfigError::Inconsistent(format!(
                "n = {n} but alpha has {} entries (expected n - 1)",
                c.alpha.len()
            )));
        }
        c.scheme = self.scheme()?;
        if self.get("diag0").is_some() {
            c.diag0 = Some(self.f64_list("diag0")?);
        }
        c.validate()
            .map_err(|e| ConfigError::Inconsistent(e.to_string()))?;
        Ok(c)
    }
}

fn parse_f64(v: &str) -> Result<f64, String> {
    let x: f64 = v.trim().parse().map_err(|_| format!("`{v}` is not a number"))?;
    if x.is_finite() {
        Ok(x)
    } else {
        Err(format!("`{v}` is not finite"))
    }
}

fn parse_f64_list(v: &str) -> Result<Vec<f64>, String> {
    if v.trim().is_empty() {
        return Ok(Vec::new());
    }
    v.split(',').map(parse_f64).collect()
}
