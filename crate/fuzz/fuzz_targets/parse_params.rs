#![no_main]

use gammaodds::parse::parse_params;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    if let Ok(p) = parse_params(s) {
        assert!(p.iter().all(|x| x.is_finite()));
    }
});
