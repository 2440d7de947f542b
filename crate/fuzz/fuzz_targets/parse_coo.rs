#![no_main]
use heom_core::io::{parse_coo, write_coo};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(m) = parse_coo(text) {
        let again = parse_coo(&write_coo(&m)).expect("written matrix parses");
        assert_eq!(write_coo(&m), write_coo(&again));
    }
});
