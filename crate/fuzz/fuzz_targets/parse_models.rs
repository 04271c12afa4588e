#![no_main]

use gammaodds::comparison::parse_models;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    if let Ok(ids) = parse_models(s) {
        assert!(!ids.is_empty() && ids.len() <= 3);
    }
});
