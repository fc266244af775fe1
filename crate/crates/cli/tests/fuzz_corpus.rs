//! Runs the checked-in fuzz seeds through the parsers.

use std::fs;
use std::path::PathBuf;

fn seeds(target: &str) -> Vec<(PathBuf, Vec<u8>)> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fuzz/corpus").join(target);
    let mut out: Vec<_> = fs::read_dir(&dir)
        .unwrap()
        .map(|e| {
            let path = e.unwrap().path();
            let data = fs::read(&path).unwrap();
            (path, data)
        })
        .collect();
    out.sort();
    assert!(!out.is_empty(), "no seeds in {}", dir.display());
    out
}

#[test]
fn comparison_seeds() {
    let mut accepted = 0;
    for (_, data) in seeds("parse_comparisons") {
        accepted += usize::from(crowdc_core::comparisons_csv::parse_comparisons(&data).is_ok());
    }
    assert!(accepted >= 2);
}

#[test]
fn config_seeds() {
    for (path, data) in seeds("parse_sweep_config") {
        let text = String::from_utf8(data).unwrap();
        assert!(crowdc_cli::parse_config(&text).is_ok(), "{}", path.display());
    }
}

#[test]
fn results_seeds() {
    for (path, data) in seeds("parse_results") {
        assert!(crowdc_cli::results::parse_results(&data).is_ok(), "{}", path.display());
    }
}
