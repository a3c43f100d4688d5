//! Exact desk-scale simulation of a measurement-only verifiable blind
//! quantum computing protocol with quantum-input verification.
//!
//! The crate is organized around five layers:
//!
//! * [`qsim`] — dense state-vector / density-operator simulation of a few
//!   qubits: gates, Pauli-string algebra, projective measurement, partial
//!   trace and trace distance.
//! * [`graph`] — the protocol's resource layout: a computation graph on the
//!   server-prepared register, an input block, and the matching that couples
//!   the two, plus the stabilizer generators of the coupled state.
//! * [`stab`] — the randomized stabilizer test and its quantitative
//!   guarantees (pass probability, gentle-measurement bound, closeness
//!   envelope).
//! * [`protocol`] — the client/server state machine: one-time padding and
//!   permutation of the input, pluggable server strategies, the three
//!   verification branches, and Monte-Carlo trial orchestration.
//! * [`analysis`] — the acceptance-rate algebra (completeness and soundness
//!   bounds, the optimal branch probability and its gap) and the exhaustive
//!   Pauli-twirl machinery behind the input-test soundness bound.

pub mod analysis;
pub mod error;
pub mod graph;
pub mod protocol;
pub mod qsim;
pub mod stab;

pub use error::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
