#![no_main]

use crosstalk_sim::device::{batches_from_json, batches_to_json};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(batches) = batches_from_json(text) {
        assert_eq!(
            batches_from_json(&batches_to_json(&batches)).unwrap(),
            batches
        );
    }
});
