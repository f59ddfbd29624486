//! Kraus channels, rate conversions, and the standard, crosstalk-aware and
//! injected noise models.

mod kraus;
mod model;
mod rates;
mod table;

pub use kraus::{
    amplitude_damping, depolarizing, pauli_operator, phase_damping, thermal_relaxation,
    KrausChannel, ThermalRelaxationParams,
};
pub use model::{
    build_crosstalk_model, build_standard_model, effective_rates, inject_crosstalk,
    AttachedChannel, BoundNoiseModel, ChannelOrigin, ChannelSpec, GateNoise, InstructionNoise,
    NoiseModel, NoiseWarning, NoisyOp,
};
pub use rates::{composite_error, depol_on_top, depol_to_rate, rate_to_depol, DepolarizingParams};
pub use table::{CrosstalkInjection, CrosstalkRates, CrosstalkTable};
