//! Gate-level circuit IR and the transformations applied before execution.

mod gate;
mod native;
mod schedule;
mod twirl;

pub use gate::{Circuit, Gate, Instruction};
pub use native::map_to_native;
pub use schedule::{active_qubits, schedule, Schedule, ScheduledItem};
pub use twirl::{cx_conjugate, randomized_compile, Pauli, TwirlInsertion, TwirlRecord};
