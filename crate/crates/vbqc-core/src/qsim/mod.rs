//! Exact dense simulation of few-qubit quantum states.

pub mod gates;
pub mod linalg;
pub mod measure;
pub mod pauli;
pub mod random;
pub mod state;

pub use linalg::{hermitian_eigendecomposition, spectral_norm, trace_distance};
pub use measure::{measure_pauli_string, measure_qubit_z};
pub use pauli::{Pauli, PauliString, Sign};
pub use state::{
    CMat, CVec, DensityOperator, PovmElement, QuantumState, StateVector, PROB_FLOOR, TOL_EIGEN,
    TOL_EXACT,
};
