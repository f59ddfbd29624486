#![no_main]

use crosstalk_sim::simulator::Counts;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(counts) = Counts::from_json(text) {
        let total: u64 = counts.counts.values().sum();
        assert_eq!(total, counts.shots);
    }
});
