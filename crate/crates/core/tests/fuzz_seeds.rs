//! Replays the checked-in fuzz corpus through the parsers.

use std::path::PathBuf;

use gammaodds::comparison::parse_models;
use gammaodds::data::parse_csv;
use gammaodds::parse::{parse_grid, parse_params};

fn seeds(target: &str) -> Vec<Vec<u8>> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fuzz/corpus").join(target);
    let mut paths: Vec<_> = std::fs::read_dir(&dir).unwrap().map(|e| e.unwrap().path()).collect();
    paths.sort();
    let out: Vec<Vec<u8>> = paths.iter().map(|p| std::fs::read(p).unwrap()).collect();
    assert!(!out.is_empty(), "no seeds in {}", dir.display());
    out
}

#[test]
fn csv_seeds() {
    let mut ok = 0;
    for s in seeds("parse_csv") {
        let (mode, body) = s.split_first().unwrap();
        let column = [None, Some("0"), Some("flow")][(*mode % 3) as usize];
        ok += parse_csv(body, "seed", column).is_ok() as usize;
    }
    assert!(ok >= 2);
}

#[test]
fn text_seeds() {
    for s in seeds("parse_grid") {
        let _ = parse_grid(std::str::from_utf8(&s).unwrap());
    }
    assert_eq!(parse_grid("0:10:11").unwrap().len(), 11);
    for s in seeds("parse_params") {
        let _ = parse_params(std::str::from_utf8(&s).unwrap());
    }
    for s in seeds("parse_models") {
        let _ = parse_models(std::str::from_utf8(&s).unwrap());
    }
}
