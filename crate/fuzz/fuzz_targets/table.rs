#![no_main]

use crosstalk_sim::noise::CrosstalkTable;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(table) = CrosstalkTable::from_json(text) {
        assert_eq!(
            CrosstalkTable::from_json(&table.to_json()).unwrap().len(),
            table.len()
        );
    }
});
