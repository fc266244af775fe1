#![no_main]

use crowdc_cli::config::parse_config;
use crowdc_cli::sweep::{expected_record_count, skipped_cells};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(config) = parse_config(text) {
        // Planning must not panic on any accepted config.
        let _ = skipped_cells(&config);
        let _ = expected_record_count(&config);
    }
});
