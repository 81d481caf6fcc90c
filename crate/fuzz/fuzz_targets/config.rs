#![no_main]

use libfuzzer_sys::fuzz_target;
use orient_cli::config::CliConfig;

fuzz_target!(|data: &[u8]| {
    let text = String::from_utf8_lossy(data);
    let _ = CliConfig::from_toml(&text);
    if let Ok(cfg) = CliConfig::from_json(&text) {
        let round = CliConfig::from_json(&cfg.provenance("fuzz").to_string()).expect("provenance re-parses");
        assert_eq!(round, cfg);
    }
});
