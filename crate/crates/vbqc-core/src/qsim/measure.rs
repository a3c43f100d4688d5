//! Sampled projective measurements with the zero-branch clamping policy.

use rand::Rng;

use super::pauli::{PauliString, Sign};
use super::state::{QuantumState, PROB_FLOOR};
use crate::Result;

/// Clamp numerical dust: probabilities below the floor become exactly 0,
/// above 1 − floor become exactly 1.
#[inline]
pub(crate) fn clamp_probability(p: f64) -> f64 {
    if p < PROB_FLOOR {
        0.0
    } else if p > 1.0 - PROB_FLOOR {
        1.0
    } else {
        p
    }
}

/// Measure a ±1-signed Pauli string. The outcome is sampled with
/// Pr[+1] = Tr((I+P)/2 ρ); the state collapses to the renormalized
/// projection. A zero-probability branch is never sampled.
pub fn measure_pauli_string<S: QuantumState, R: Rng + ?Sized>(
    state: &mut S,
    p: &PauliString,
    rng: &mut R,
) -> Result<Sign> {
    let expectation = state.expectation_pauli(p)?;
    let pr_plus = clamp_probability((1.0 + expectation) / 2.0);
    let outcome = if pr_plus >= 1.0 {
        Sign::Plus
    } else if pr_plus <= 0.0 {
        Sign::Minus
    } else if rng.gen::<f64>() < pr_plus {
        Sign::Plus
    } else {
        Sign::Minus
    };
    state.project_pauli(p, outcome)?;
    Ok(outcome)
}

/// Measure one qubit in the computational basis; returns the bit.
pub fn measure_qubit_z<S: QuantumState, R: Rng + ?Sized>(
    state: &mut S,
    qubit: usize,
    rng: &mut R,
) -> Result<bool> {
    let pr_one = clamp_probability(state.prob_qubit_one(qubit)?);
    let bit = if pr_one >= 1.0 {
        true
    } else if pr_one <= 0.0 {
        false
    } else {
        rng.gen::<f64>() < pr_one
    };
    state.project_qubit_z(qubit, bit)?;
    Ok(bit)
}
