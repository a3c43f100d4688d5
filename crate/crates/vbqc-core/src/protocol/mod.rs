//! The client/server protocol state machine: step-1 padding, step-2 server
//! strategies, the three step-3 branches, and trial orchestration.

pub mod pattern;
pub mod secret;
pub mod strategy;
pub mod trial;

pub use pattern::{
    exact_compute_acceptance, execute_pattern, realize_wire_pattern, realized_circuit_unitary,
    ByproductTable, MeasurementBasis, MeasurementPattern, PatternStep, RealizedWire, WireProgram,
};
pub use secret::{alice_prepare, alice_prepare_with, trap_block_projector, AliceSecret, InputBlock};
pub use strategy::{bob_respond, bob_respond_pure, BobStrategy};
pub use trial::{
    branch_compute, branch_input_test, estimate_acceptance, exact_compute_acceptance_for_state,
    exact_test_probabilities, input_test_corrected_state, input_test_pass_probability,
    rho_before_protocol_path, run_trial, trial_rng, AcceptanceEstimate, Branch, BranchDiagnostics,
    DecisionInstance, TrialOutcome,
};
