#![no_main]

use gammaodds::parse::parse_grid;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    if let Ok(g) = parse_grid(s) {
        assert!(g.len() >= 2);
        assert!(g.windows(2).all(|w| w[0] <= w[1]));
        assert!(g.iter().all(|x| x.is_finite()));
    }
});
