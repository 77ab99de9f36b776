#![no_main]

use libfuzzer_sys::fuzz_target;
use tridyson_cli::config::ConfigFile;

fuzz_target!(|data: &str| {
    let Ok(cfg) = data.parse::<ConfigFile>() else {
        return;
    };
    // Rendering must produce a file that parses back to the same settings.
    let text = cfg.render();
    let again: ConfigFile = text.parse().expect("rendered config parses");
    assert_eq!(again.render(), text);
    let _ = cfg.sde_config();
    let _ = cfg.ranges(4);
});
