//! Exact dense statevector simulation of the variational hidden layer.
//!
//! Conventions used throughout:
//! - qubit 0 is the most significant bit of a basis-state index;
//! - `RZ(λ) = diag(e^{-iλ/2}, e^{iλ/2})`,
//!   `RY(θ) = [[cos θ/2, -sin θ/2], [sin θ/2, cos θ/2]]`;
//! - `Rot(φ, θ, ω) = RZ(ω)·RY(θ)·RZ(φ)`;
//! - each ansatz layer applies `Rot` to every qubit in ascending order and
//!   then `CNOT(i, (i+1) mod N)` for ascending `i` (skipped when `N = 1`).

mod circuit;
mod gates;
mod grad;
mod state;

pub use circuit::{pauli_z_expectations, run_ansatz, CircuitParams, ANGLES_PER_ROTATION};
pub use gates::{apply_cnot, apply_rot, rot_matrix, Matrix2};
pub use grad::{
    expectations, gradients_adjoint, gradients_parameter_shift, vjp_adjoint, GradientResult,
    VjpResult,
};
pub use state::{amplitude_embed, Statevector, MAX_QUBITS, ZERO_NORM_THRESHOLD};
