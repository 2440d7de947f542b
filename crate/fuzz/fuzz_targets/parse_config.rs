#![no_main]
use heom_cli::config::to_json;
use heom_cli::parse_config;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(cfg) = parse_config(text) {
        // whatever validates must survive a round trip
        let again = parse_config(&to_json(&cfg)).expect("serialized config parses");
        assert_eq!(cfg, again);
    }
});
