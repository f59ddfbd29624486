#![no_main]

use crosstalk_sim::noise::CrosstalkInjection;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(injection) = CrosstalkInjection::from_json(text) {
        let again = CrosstalkInjection::from_json(&injection.to_json()).unwrap();
        assert!(again.weights.keys().eq(injection.weights.keys()));
    }
});
