#![no_main]

use crowdc_cli::results::{parse_results, summarize, write_results};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(rows) = parse_results(data) {
        let _ = summarize(&rows);
        let mut buf = Vec::new();
        write_results(&mut buf, &rows).unwrap();
        assert_eq!(parse_results(&buf).unwrap().len(), rows.len());
    }
});
