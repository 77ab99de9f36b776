#![no_main]

use libfuzzer_sys::fuzz_target;
use tridyson_cli::trajectory::{header, read_trajectory};

fuzz_target!(|data: &[u8]| {
    if let Ok(t) = read_trajectory(data) {
        let width = header(t.n, &t.minors).len();
        assert!(t
            .rows
            .iter()
            .all(|r| r.len() == width && r.iter().all(|x| x.is_finite())));
    }
});
