//! Minor-range lists such as `1:2, 2:4` (1-based, inclusive).

use thiserror::Error;
use tridyson::MinorRange;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RangeSpec {
    /// Every contiguous minor of the matrix.
    All,
    List(Vec<MinorRange>),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RangeError {
    #[error("`{0}` is not of the form p:q")]
    Form(String),
    #[error("`{0}`: bounds must satisfy 1 <= p <= q")]
    Bounds(String),
    #[error("range {0} listed twice")]
    Repeated(MinorRange),
}

/// Parses `all`, `none`, the empty string, or a comma- or
/// whitespace-separated list of `p:q` items. Order is kept.
pub fn parse_ranges(text: &str) -> Result<RangeSpec, RangeError> {
    let t = text.trim();
    match t {
        "all" => return Ok(RangeSpec::All),
        "" | "none" => return Ok(RangeSpec::List(Vec::new())),
        _ => {}
    }
    let mut out: Vec<MinorRange> = Vec::new();
    for item in t
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|s| !s.is_empty())
    {
        let (p, q) = item
            .split_once(':')
            .ok_or_else(|| RangeError::Form(item.into()))?;
        let num = |s: &str| {
            s.trim()
                .parse::<usize>()
                .map_err(|_| RangeError::Form(item.into()))
        };
        let (p, q) = (num(p)?, num(q)?);
        if p == 0 || q < p {
            return Err(RangeError::Bounds(item.into()));
        }
        let r = MinorRange::new(p, q);
        if out.contains(&r) {
            return Err(RangeError::Repeated(r));
        }
        out.push(r);
    }
    Ok(RangeSpec::List(out))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lists_and_keywords() {
        assert_eq!(parse_ranges(" all ").unwrap(), RangeSpec::All);
        assert_eq!(parse_ranges("none").unwrap(), RangeSpec::List(vec![]));
        assert_eq!(parse_ranges("").unwrap(), RangeSpec::List(vec![]));
        assert_eq!(
            parse_ranges("2:3,1:1  1:3").unwrap(),
            RangeSpec::List(vec![
                MinorRange::new(2, 3),
                MinorRange::new(1, 1),
                MinorRange::new(1, 3)
            ])
        );
    }

    #[test]
    fn rejects_bad_items() {
        assert_eq!(parse_ranges("1-2"), Err(RangeError::Form("1-2".into())));
        assert_eq!(parse_ranges("1:x"), Err(RangeError::Form("1:x".into())));
        assert_eq!(parse_ranges("0:2"), Err(RangeError::Bounds("0:2".into())));
        assert_eq!(parse_ranges("3:2"), Err(RangeError::Bounds("3:2".into())));
        assert!(matches!(parse_ranges("1:2,1:2"), Err(RangeError::Repeated(_))));
        assert!(parse_ranges("1:2:3").is_err());
        assert!(parse_ranges("99999999999999999999999:1").is_err());
    }
}
