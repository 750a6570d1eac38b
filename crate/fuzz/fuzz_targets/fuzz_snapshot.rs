#![no_main]

use hokdv_core::snapshot;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    // anything accepted must survive a render/parse round trip unchanged
    if let Ok(u) = snapshot::parse(text) {
        let again = snapshot::parse(&snapshot::render(&u)).expect("rendered snapshot parses");
        assert_eq!(u, again);
    }
});
