#![no_main]

use crosstalk_sim::device::load_snapshot;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(snap) = load_snapshot(data) {
        let again = load_snapshot(snap.to_json().as_bytes()).expect("serialized snapshot reloads");
        assert_eq!(again.num_qubits(), snap.num_qubits());
        assert_eq!(again.undirected_edges(), snap.undirected_edges());
    }
});
