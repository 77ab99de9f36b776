//! Replays the checked-in fuzz corpus through the properties the fuzz
//! targets assert, so the seeds stay meaningful without a fuzzing toolchain.

use std::fs;
use std::path::PathBuf;

use tridyson_cli::config::ConfigFile;
use tridyson_cli::ranges::{parse_ranges, RangeSpec};
use tridyson_cli::trajectory::{header, read_trajectory};

fn seeds(target: &str) -> Vec<(PathBuf, Vec<u8>)> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../fuzz/corpus")
        .join(target);
    let mut out: Vec<_> = fs::read_dir(&dir)
        .unwrap_or_else(|e| panic!("{}: {e}", dir.display()))
        .map(|e| e.unwrap().path())
        .map(|p| {
            let bytes = fs::read(&p).unwrap();
            (p, bytes)
        })
        .collect();
    out.sort();
    assert!(!out.is_empty(), "no seeds for {target}");
    out
}

#[test]
fn config_seeds() {
    let mut parsed = 0;
    for (path, bytes) in seeds("config_parse") {
        let Ok(text) = std::str::from_utf8(&bytes) else {
            continue;
        };
        if let Ok(cfg) = text.parse::<ConfigFile>() {
            parsed += 1;
            let r = cfg.render();
            let again: ConfigFile = r.parse().unwrap_or_else(|e| panic!("{}: {e}", path.display()));
            assert_eq!(again.render(), r);
            let _ = cfg.sde_config();
            let _ = cfg.ranges(4);
        }
    }
    assert!(parsed >= 1);
}

#[test]
fn range_seeds() {
    for (_, bytes) in seeds("range_list") {
        let Ok(text) = std::str::from_utf8(&bytes) else {
            continue;
        };
        if let Ok(RangeSpec::List(list)) = parse_ranges(text) {
            let joined: Vec<String> = list.iter().map(|r| format!("{}:{}", r.p, r.q)).collect();
            assert_eq!(parse_ranges(&joined.join(",")), Ok(RangeSpec::List(list)));
        }
    }
}

#[test]
fn trajectory_seeds() {
    let mut parsed = 0;
    for (_, bytes) in seeds("trajectory_csv") {
        if let Ok(t) = read_trajectory(bytes.as_slice()) {
            parsed += 1;
            let width = header(t.n, &t.minors).len();
            assert!(t.rows.iter().all(|r| r.len() == width));
        }
    }
    assert!(parsed >= 2);
}
