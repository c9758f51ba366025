//! Dense complex linear algebra and qubit-state primitives for registers of
//! at most eight qubits.
//!
//! Qubit 0 is the leftmost tensor factor, so two-qubit basis states are
//! ordered `|00⟩, |01⟩, |10⟩, |11⟩`.

mod bell;
mod matrix;
mod state;

pub use bell::{bell_state, twirl_to_werner, werner_density, BellDiagonal, BellLabel, WernerParam};
pub use matrix::{gates, ComplexMatrix, C64, MAX_DIM};
pub use state::{
    apply_unitary, bloch_to_ket, computational_projectors, embed, fidelity_pure,
    measure_projective, orthogonal_ket, partial_trace, tensor, tensor_power, BlochAngles,
    DensityOperator, MeasurementOutcome, EIGEN_FLOOR, HERMITIAN_TOL, TRACE_TOL, UNITARY_TOL,
};
