#![no_main]

use fwdiss::store::{parse_diagnostics, render_diagnostics};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(rows) = parse_diagnostics(text) {
        let again = parse_diagnostics(&render_diagnostics(&rows)).expect("rendered csv parses");
        assert_eq!(again.len(), rows.len());
    }
});
