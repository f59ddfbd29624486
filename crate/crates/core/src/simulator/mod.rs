//! Dense density-matrix simulation, exact distributions, readout sampling
//! and the stabilizer tableau used for Clifford algebra.

mod density;
mod matrix;
mod sampling;
mod statevector;
mod tableau;

pub use density::{apply_channel, apply_gate, DensityMatrix, MAX_DENSE_QUBITS};
pub use matrix::{gate_matrix, CMatrix};
pub use sampling::{apply_readout, sample_counts, sample_distribution, Counts, ReadoutError};
pub use statevector::{exact_distribution, exact_statevector, MAX_STATEVECTOR_QUBITS};
pub use tableau::{clifford_inverse, CliffordTableau, PauliString};

/// Algebraic identities (CPTP sums, Kraus relations, tableau-vs-dense).
pub const TOL_ALGEBRAIC: f64 = 1e-12;
/// State invariants (trace, Hermiticity).
pub const TOL_STATE: f64 = 1e-10;
/// Slack on the smallest eigenvalue of a density matrix.
pub const TOL_PSD: f64 = 1e-9;
