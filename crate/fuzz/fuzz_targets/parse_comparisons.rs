#![no_main]

use crowdc_core::comparisons_csv::{parse_comparisons, write_comparisons};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(comparisons) = parse_comparisons(data) {
        let mut buf = Vec::new();
        write_comparisons(&mut buf, &comparisons).unwrap();
        assert_eq!(parse_comparisons(&buf).unwrap(), comparisons);
    }
});
