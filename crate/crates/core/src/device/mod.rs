//! Device topology, calibration ingestion and characterization planning.

mod chains;
mod collisions;
mod snapshot;
mod triplets;

pub use chains::{enumerate_chains, ChainOrientation};
pub use collisions::{detect_collisions, CollisionReport, CollisionRule, CollisionThresholds};
pub use snapshot::{load_snapshot, DeviceSnapshot, EdgeCalibration, QubitCalibration};
pub use triplets::{
    batches_from_json, batches_to_json, extract_triplets, schedule_batches, triplets_conflict,
    validate_batches, Batch, BatchViolation, Triplet,
};
