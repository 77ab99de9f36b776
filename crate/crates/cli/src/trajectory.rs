//! Eigenvalue trajectory CSV: a header `t,lambda_1,...,lambda_n` followed
//! by `lambda_p_q_r` for eigenvalue `r` of each extra minor `(p, q)`; one
//! row per retained grid time, every number with 17 significant digits.

use std::io::{Read, Write};

use thiserror::Error;
use tridyson::dyson::EigenPathSet;
use tridyson::MinorRange;

#[derive(Debug, Error)]
pub enum TrajectoryError {
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("bad header: {0}")]
    Header(String),
    #[error("row {row}, column `{column}`: {msg}")]
    Value { row: usize, column: String, msg: String },
    #[error("minor {0} is not tracked by the eigenvalue paths")]
    Untracked(MinorRange),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub n: usize,
    /// Extra minors in column order.
    pub minors: Vec<MinorRange>,
    /// `rows[s][0]` is the time; the rest follow the header.
    pub rows: Vec<Vec<f64>>,
}

impl Trajectory {
    pub fn times(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r[0]).collect()
    }

    /// Full-matrix eigenvalue `i` (1-based) over time.
    pub fn lambda(&self, i: usize) -> Vec<f64> {
        self.rows.iter().map(|r| r[i]).collect()
    }
}

pub fn header(n: usize, minors: &[MinorRange]) -> Vec<String> {
    let mut h = vec!["t".to_string()];
    h.extend((1..=n).map(|i| format!("lambda_{i}")));
    for r in minors {
        h.extend((1..=r.len()).map(|k| format!("lambda_{}_{}_{k}", r.p, r.q)));
    }
    h
}

fn fmt(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_trajectory<W: Write>(
    w: W,
    eigs: &EigenPathSet,
    minors: &[MinorRange],
) -> Result<(), TrajectoryError> {
    for &r in minors {
        if eigs.spectrum(0, r).is_none() && !eigs.is_empty() {
            return Err(TrajectoryError::Untracked(r));
        }
    }
    let mut out = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(w);
    out.write_record(header(eigs.n(), minors))?;
    for (s, &t) in eigs.times().iter().enumerate() {
        let mut rec = vec![fmt(t)];
        rec.extend(eigs.full(s).values().iter().map(|&x| fmt(x)));
        for &r in minors {
            let sp = eigs.spectrum(s, r).expect("checked above");
            rec.extend(sp.values().iter().map(|&x| fmt(x)));
        }
        out.write_record(&rec)?;
    }
    out.flush().map_err(csv::Error::from)?;
    Ok(())
}

fn parse_header(cols: &csv::StringRecord) -> Result<(usize, Vec<MinorRange>), TrajectoryError> {
    let bad = |m: String| TrajectoryError::Header(m);
    let mut it = cols.iter().peekable();
    if it.next() != Some("t") {
        return Err(bad("first column must be `t`".into()));
    }
    let mut n = 0;
    while let Some(c) = it.peek() {
        if *c != format!("lambda_{}", n + 1) {
            break;
        }
        n += 1;
        it.next();
    }
    if n == 0 {
        return Err(bad("expected lambda_1 after t".into()));
    }
    let mut minors = Vec::new();
    while let Some(c) = it.next() {
        let parts: Vec<&str> = c.strip_prefix("lambda_").unwrap_or("").split('_').collect();
        let nums: Option<Vec<usize>> = parts.iter().map(|p| p.parse().ok()).collect();
        let Some([p, q, 1]) = nums.as_deref().and_then(|v| <[usize; 3]>::try_from(v).ok()) else {
            return Err(bad(format!("`{c}` does not start a minor block lambda_p_q_1")));
        };
        if p == 0 || q < p || q > n {
            return Err(bad(format!("`{c}`: minor ({p}, {q}) outside 1..={n}")));
        }
        for k in 2..=(q - p + 1) {
            let want = format!("lambda_{p}_{q}_{k}");
            if it.next() != Some(want.as_str()) {
                return Err(bad(format!("expected `{want}`")));
            }
        }
        minors.push(MinorRange::new(p, q));
    }
    Ok((n, minors))
}

pub fn read_trajectory<R: Read>(r: R) -> Result<Trajectory, TrajectoryError> {
    let mut rd = csv::ReaderBuilder::new().has_headers(true).from_reader(r);
    let head = rd.headers()?.clone();
    let (n, minors) = parse_header(&head)?;
    let mut rows = Vec::new();
    for (i, rec) in rd.records().enumerate() {
        let rec = rec?;
        let row = rec
            .iter()
            .zip(head.iter())
            .map(|(v, col)| {
                let x: f64 = v.trim().parse().map_err(|_| TrajectoryError::Value {
                    row: i + 1,
                    column: col.to_string(),
                    msg: format!("`{v}` is not a number"),
                })?;
                if x.is_finite() {
                    Ok(x)
                } else {
                    Err(TrajectoryError::Value {
                        row: i + 1,
                        column: col.to_string(),
                        msg: "not finite".into(),
                    })
                }
            })
            .collect::<Result<Vec<f64>, _>>()?;
        rows.push(row);
    }
    Ok(Trajectory { n, minors, rows })
}
