#![no_main]

use libfuzzer_sys::fuzz_target;
use tridyson_cli::ranges::{parse_ranges, RangeSpec};

fuzz_target!(|data: &str| {
    if let Ok(RangeSpec::List(list)) = parse_ranges(data) {
        for r in &list {
            assert!(1 <= r.p && r.p <= r.q);
        }
        let text: Vec<String> = list.iter().map(|r| format!("{}:{}", r.p, r.q)).collect();
        assert_eq!(parse_ranges(&text.join(",")), Ok(RangeSpec::List(list)));
    }
});
