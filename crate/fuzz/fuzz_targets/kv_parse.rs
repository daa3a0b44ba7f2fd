#![no_main]

use fwdiss::kv::KeyValues;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(kv) = KeyValues::parse(text) {
        assert_eq!(
            KeyValues::parse(&kv.to_string()).expect("rendered text parses"),
            kv
        );
    }
});
