#![no_main]

use crosstalk_sim::circuit::Circuit;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(circuit) = Circuit::from_json(text) {
        assert_eq!(
            Circuit::from_json(&circuit.to_json()).unwrap().len(),
            circuit.len()
        );
    }
});
