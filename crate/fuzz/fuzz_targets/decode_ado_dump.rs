#![no_main]
use heom_core::io::AdoDump;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(d) = AdoDump::decode(data) {
        let bytes = d.encode().expect("decoded dump encodes");
        let again = AdoDump::decode(&bytes).expect("encoded dump decodes");
        assert_eq!(again.encode().unwrap(), bytes);
    }
});
