//! Shared fixtures for the criterion benches.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use vbqc_core::graph::ProtocolGraph;
use vbqc_core::protocol::{DecisionInstance, InputBlock, WireProgram};
use vbqc_core::qsim::StateVector;

pub fn bench_rng() -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(0xBEEF)
}

pub fn chain_setup() -> (ProtocolGraph, InputBlock, DecisionInstance) {
    let graph = ProtocolGraph::chain(3, 1).expect("valid preset");
    let input = InputBlock::new(StateVector::basis_state(1, 1).unwrap()).unwrap();
    let instance = DecisionInstance::amplified(10, WireProgram::identity()).unwrap();
    (graph, input, instance)
}
