//! Shipped fixtures: the 27-qubit heavy-hexagon device and the published
//! 12-batch triplet assignment.
//!
//! Coupling map and drive designations are those of the real device; the
//! calibration numbers are synthetic but in the usual range for the
//! processor family.

use crate::device::{batches_from_json, load_snapshot, Batch, DeviceSnapshot};
use crate::noise::CrosstalkInjection;

pub const EHNINGEN_TOPOLOGY_JSON: &str = include_str!("../fixtures/ehningen_topology.json");
pub const PUBLISHED_BATCHES_JSON: &str = include_str!("../fixtures/published_batches.json");
pub const EHNINGEN_INJECTION_JSON: &str = include_str!("../fixtures/ehningen_injection.json");

pub fn ehningen() -> DeviceSnapshot {
    load_snapshot(EHNINGEN_TOPOLOGY_JSON.as_bytes()).expect("shipped fixture is valid")
}

pub fn published_batches() -> Vec<Batch> {
    batches_from_json(PUBLISHED_BATCHES_JSON).expect("shipped fixture is valid")
}

/// Ground-truth crosstalk on three triplets of the device fixture.
pub fn ehningen_injection() -> CrosstalkInjection {
    CrosstalkInjection::from_json(EHNINGEN_INJECTION_JSON).expect("shipped fixture is valid")
}
