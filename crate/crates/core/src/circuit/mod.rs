//! Parameterised circuits and their simulators.
//!
//! Three exact evaluation routes share one gate IR:
//! statevector ([`apply_circuit_pure`]), density matrix
//! ([`apply_circuit_density`]) and Heisenberg-picture propagation of an
//! observable in the Pauli basis ([`PauliOperator`]). The last one is what the
//! training loop uses, since one propagated observable serves every input.

mod gate;
mod gradient;
mod observable;
mod pauli;
mod sampling;
mod simulate;

pub use gate::{build_real_amplitudes, Angle, Axis, Gate, NoiseSlot, ParamCircuit};
pub use gradient::parameter_shift_gradient;
pub use observable::{expectation, Observable};
pub use pauli::PauliOperator;
pub use sampling::{sample_binary, sample_counts};
pub use simulate::{apply_circuit_density, apply_circuit_pure};

pub(crate) use gate::GateShift;
pub(crate) use simulate::heisenberg_shifted;
