#![no_main]
use std::path::Path;

use libfuzzer_sys::fuzz_target;
use obprm::montecarlo::ExperimentConfig;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(cfg) = ExperimentConfig::parse(text, Path::new(".")) {
        assert!(cfg.validate().is_ok());
        assert_eq!(cfg.source(), text.trim());
    }
});
