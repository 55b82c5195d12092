#![no_main]

use libfuzzer_sys::fuzz_target;
use sevrel::AnalysisConfig;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(cfg) = AnalysisConfig::from_toml_str(text) {
        // A parsed config must describe a runnable model.
        let m = cfg.model.moments();
        assert!(!m.mean.is_nan() || cfg.model.terms().is_empty());
        cfg.simulation.validate().unwrap();
    }
});
