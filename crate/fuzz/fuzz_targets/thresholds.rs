#![no_main]

use crosstalk_sim::device::CollisionThresholds;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let _ = CollisionThresholds::from_json(text);
});
