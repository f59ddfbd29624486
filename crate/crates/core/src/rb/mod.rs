//! Randomized benchmarking: Clifford sampling, isolated and simultaneous
//! sequences, decay fitting and full-device characterization.

mod characterize;
mod clifford;
mod fit;
mod sequence;

pub use characterize::{
    characterize, marginal_survival, run_rb, Characterization, RBCurve, TripletResult,
};
pub use clifford::{sample_clifford, Clifford, CliffordGroup};
pub use fit::{fit_decay, DecayFit, RBPoint};
pub use sequence::{
    build_batch_rb, build_rb_circuits, build_simultaneous_rb, clifford_sequence, RBCircuit,
    RBConfig,
};
