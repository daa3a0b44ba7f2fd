#![no_main]

use fwdiss::snapshot::Snapshot;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(snap) = Snapshot::decode(data) {
        // anything that decodes must re-encode to the same bytes
        let again = Snapshot::decode(&snap.encode()).expect("re-decode");
        assert_eq!(again.encode(), snap.encode());
    }
});
