#![no_main]

use libfuzzer_sys::fuzz_target;
use logipure_cli::ExperimentConfig;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(cfg) = ExperimentConfig::from_json(text) {
        let back = ExperimentConfig::from_json(&cfg.echo()).expect("echo parses");
        assert_eq!(back, cfg);
    }
});
