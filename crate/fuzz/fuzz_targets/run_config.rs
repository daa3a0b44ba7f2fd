#![no_main]

use fwdiss::kv::KeyValues;
use fwdiss_cli::RunConfig;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(kv) = KeyValues::parse(text) else {
        return;
    };
    if let Ok(cfg) = RunConfig::resolve(None, Some(&kv)) {
        if cfg.validate().is_ok() {
            assert_eq!(RunConfig::from_kv(&cfg.to_kv()).expect("round trip"), cfg);
        }
    }
});
