//! Acceptance-rate algebra and the exhaustive twirl verification suite.

pub mod bounds;
pub mod twirl;

pub use bounds::{bound_set, delta_of, gap_at_qstar, BoundSet, GapAtQStar, RateParams};
pub use twirl::{
    appendix_final_chain, combined_soundness_check, damaged_data_observable, pauli_basis,
    pauli_decompose, pauli_reconstruct, rho_before_exact, twirl_decomposition,
    verify_cross_term_cancellation, verify_psipass_bound, verify_rho2_bound,
    CombinedSoundnessReport, PsipassReport, TwirlDecomposition,
};
