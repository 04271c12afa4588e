#![no_main]

use gammaodds::data::parse_csv;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    // first byte picks the column mode
    let (mode, body) = match data.split_first() {
        Some((m, rest)) => (*m, rest),
        None => (0, data),
    };
    let column = match mode % 3 {
        0 => None,
        1 => Some("0"),
        _ => Some("flow"),
    };
    if let Ok(d) = parse_csv(body, "fuzz", column) {
        assert!(!d.values.is_empty());
    }
});
