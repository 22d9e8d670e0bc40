//! Simulation of measurement-based purification of logical qubits from
//! thermal states.
//!
//! A logical qubit lives in the doubly degenerate ground manifold of a code
//! Hamiltonian. An engineered interaction moves population between an
//! excited manifold and a target logical state while flipping an auxiliary
//! qubit; measuring that qubit and post-selecting leaves the code close to
//! (or exactly in) the target state.

pub mod analytic;
pub mod codes;
pub mod emr;
pub mod error;
pub mod hamiltonian;
pub mod measurement;
pub mod pauli;
pub mod table1;
pub mod tensor;
pub mod thermal;

pub use error::{Error, Result};
pub use pauli::{pauli_decompose, pauli_operator, Pauli, PauliString};
pub use tensor::{
    evolve, fidelity_pure, gibbs, hermitian_eig, kron, partial_trace, Evolver, OperatorMatrix,
    SpectralDecomposition, StateVector, C64,
};

/// Full double precision (17 significant digits) for CSV output.
pub fn format_f64(x: f64) -> String {
    format!("{x:.16e}")
}
