//! Crosstalk characterization and crosstalk-aware noise modeling for
//! fixed-frequency transmon processors.
//!
//! The crate is organised along the characterization pipeline:
//!
//! - [`device`]: calibration snapshots, collision detection, triplet
//!   extraction, batch scheduling and chain-layout enumeration.
//! - [`circuit`]: gate-level IR, ASAP scheduling, native CNOT orientation,
//!   activity analysis and randomized compiling.
//! - [`simulator`]: dense density-matrix evolution, exact distributions,
//!   readout sampling and Clifford tableaus.
//! - [`noise`]: Kraus channels, rate conversions and the standard,
//!   crosstalk-aware and injected noise models.
//! - [`backend`]: the virtual backend that executes circuits under a noise
//!   configuration.
//! - [`rb`]: Clifford sampling, (simultaneous) randomized benchmarking,
//!   decay fitting and full-device characterization.
//! - [`bench`]: Hadamard ladder, layout sweeps, Hellinger fidelity and the
//!   run-to-run outlier filter.
//!
//! Qubit 0 is always the least-significant bit of an outcome index, and
//! outcome strings are printed with qubit 0 rightmost.

pub mod backend;
pub mod bench;
pub mod circuit;
pub mod device;
mod error;
pub mod fixtures;
pub mod noise;
pub mod rb;
pub mod rng;
pub mod simulator;

pub use error::{Error, Result};
