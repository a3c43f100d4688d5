//! End-to-end protocol invariants: completeness, blindness, secret
//! inversion, oracle equivalence of the compute branch, and adversary
//! pass rates frozen from enumeration oracles.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use vbqc_core::graph::ProtocolGraph;
use vbqc_core::protocol::{
    alice_prepare_with, bob_respond, bob_respond_pure, branch_compute, estimate_acceptance,
    exact_compute_acceptance, exact_compute_acceptance_for_state, exact_test_probabilities,
    input_test_corrected_state, realize_wire_pattern, realized_circuit_unitary, AliceSecret,
    BobStrategy, DecisionInstance, InputBlock, WireProgram,
};
use vbqc_core::qsim::random::random_state_vector;
use vbqc_core::qsim::{trace_distance, DensityOperator, Pauli, PauliString, StateVector};

fn one_input() -> InputBlock {
    InputBlock::new(StateVector::basis_state(1, 1).unwrap()).unwrap()
}

#[test]
fn honest_completeness_is_exact_on_both_layouts() {
    let mut rng = ChaCha8Rng::seed_from_u64(401);
    for graph in [
        ProtocolGraph::chain(3, 1).unwrap(),
        ProtocolGraph::disjoint_wires(1, 2).unwrap(),
    ] {
        let input = InputBlock::new(random_state_vector(1, &mut rng)).unwrap();
        let (p_g, p_psi) = exact_test_probabilities(&BobStrategy::Honest, &input, &graph).unwrap();
        assert!((p_g - 1.0).abs() < 1e-10, "stabilizer test: {p_g}");
        assert!((p_psi - 1.0).abs() < 1e-10, "input test: {p_psi}");
    }
}

#[test]
fn identity_wire_is_deterministic_under_random_secrets() {
    let graph = ProtocolGraph::disjoint_wires(1, 2).unwrap();
    let program = WireProgram::identity();
    let mut rng = ChaCha8Rng::seed_from_u64(402);
    let input_one = one_input();
    let input_zero = InputBlock::new(StateVector::zero_state(1)).unwrap();
    for _ in 0..300 {
        let secret = AliceSecret::random(1, &mut rng);
        let padded = alice_prepare_with(&input_one, &secret).unwrap();
        let mut state = bob_respond_pure(&BobStrategy::Honest, &padded, &graph).unwrap();
        let (accepted, _) = branch_compute(&mut state, &secret, &program, &graph, &mut rng).unwrap();
        assert!(accepted, "input |1⟩ under identity must accept");

        let padded = alice_prepare_with(&input_zero, &secret).unwrap();
        let mut state = bob_respond_pure(&BobStrategy::Honest, &padded, &graph).unwrap();
        let (accepted, _) = branch_compute(&mut state, &secret, &program, &graph, &mut rng).unwrap();
        assert!(!accepted, "input |0⟩ under identity must reject");
    }
}

#[test]
fn trivial_and_random_secrets_have_identical_statistics() {
    // On the symmetric wire layout the acceptance statistics cannot
    // depend on the secret at all.
    let graph = ProtocolGraph::disjoint_wires(1, 2).unwrap();
    let program = WireProgram::with_angles(vec![0.7, -0.3]);
    let input = InputBlock::new(random_state_vector(1, &mut ChaCha8Rng::seed_from_u64(9))).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(403);
    let trials = 6000usize;
    let mut accept = [0usize; 2];
    for (which, fixed) in [false, true].into_iter().enumerate() {
        for _ in 0..trials {
            let secret = if fixed {
                AliceSecret::trivial(1)
            } else {
                AliceSecret::random(1, &mut rng)
            };
            let padded = alice_prepare_with(&input, &secret).unwrap();
            let mut state = bob_respond_pure(&BobStrategy::Honest, &padded, &graph).unwrap();
            let (acc, _) = branch_compute(&mut state, &secret, &program, &graph, &mut rng).unwrap();
            accept[which] += usize::from(acc);
        }
    }
    let p0 = accept[0] as f64 / trials as f64;
    let p1 = accept[1] as f64 / trials as f64;
    let se = (2.0 * 0.25 / trials as f64).sqrt();
    assert!((p0 - p1).abs() <= 5.0 * se, "random {p0} vs trivial {p1}");
}

#[test]
fn compute_branch_matches_independent_circuit_oracle() {
    // Oracle: acceptance = |⟨1| J(−φ_k)…J(−φ_0) |ψ⟩|² averaged over the
    // uniform data slot; computed here from raw 2x2 arithmetic.
    let graph = ProtocolGraph::chain(3, 1).unwrap();
    let program = WireProgram::with_angles(vec![0.9, 0.4, -1.1]);
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    let psi = random_state_vector(1, &mut rng);
    let input = InputBlock::new(psi.clone()).unwrap();

    let h = nalgebra::DMatrix::from_row_slice(
        2,
        2,
        &[
            num_complex::Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0),
            num_complex::Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0),
            num_complex::Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0),
            num_complex::Complex64::new(-std::f64::consts::FRAC_1_SQRT_2, 0.0),
        ],
    );
    let rz = |t: f64| {
        nalgebra::DMatrix::from_row_slice(
            2,
            2,
            &[
                num_complex::Complex64::new(1.0, 0.0),
                num_complex::Complex64::new(0.0, 0.0),
                num_complex::Complex64::new(0.0, 0.0),
                num_complex::Complex64::from_polar(1.0, t),
            ],
        )
    };
    // slot d couples at chain vertex d and walks to vertex 0: 1 + d hops
    let mut oracle_acc = 0.0;
    for d in 0..3usize {
        let mut u = nalgebra::DMatrix::identity(2, 2);
        for hop in 0..=d {
            let phi = program.angles.get(hop).copied().unwrap_or(0.0);
            u = &h * rz(-phi) * u;
        }
        let amp = u[(1, 0)] * psi.amplitudes()[0] + u[(1, 1)] * psi.amplitudes()[1];
        oracle_acc += amp.norm_sqr() / 3.0;
    }

    // path 1: the library's closed-form route
    let closed = exact_compute_acceptance(&graph, &program, &psi).unwrap();
    assert!((closed - oracle_acc).abs() < 1e-12);

    // path 2: Monte-Carlo over the actual adaptive pattern execution
    let trials = 10_000usize;
    let mut accepts = 0usize;
    for _ in 0..trials {
        let secret = AliceSecret::random(1, &mut rng);
        let padded = alice_prepare_with(&input, &secret).unwrap();
        let mut state = bob_respond_pure(&BobStrategy::Honest, &padded, &graph).unwrap();
        let (acc, _) = branch_compute(&mut state, &secret, &program, &graph, &mut rng).unwrap();
        accepts += usize::from(acc);
    }
    let freq = accepts as f64 / trials as f64;
    let se = (oracle_acc * (1.0 - oracle_acc) / trials as f64).sqrt().max(1e-3);
    assert!(
        (freq - oracle_acc).abs() <= 5.0 * se,
        "sampled {freq} vs oracle {oracle_acc}"
    );

    // path 3: exact outcome-path enumeration on the density pipeline
    let mut path_avg = 0.0;
    let secrets = AliceSecret::enumerate_all(1);
    for secret in secrets.iter().step_by(16) {
        let padded = alice_prepare_with(&input, secret).unwrap().density();
        let rho = bob_respond(&BobStrategy::Honest, &padded, &graph).unwrap();
        let p = exact_compute_acceptance_for_state(&rho, secret, &program, &graph).unwrap();
        // per-secret probability must equal the realized wire's circuit value
        let (pattern, realized) =
            realize_wire_pattern(&graph, secret.slot_of_source(0), &program).unwrap();
        let u = realized_circuit_unitary(&realized);
        let amp = u[(1, 0)] * psi.amplitudes()[0] + u[(1, 1)] * psi.amplitudes()[1];
        assert!(
            (p - amp.norm_sqr()).abs() < 1e-10,
            "exact path enumeration {p} vs circuit {}",
            amp.norm_sqr()
        );
        let _ = pattern;
        path_avg += p;
    }
    path_avg /= secrets.iter().step_by(16).count() as f64;
    assert!((0.0..=1.0).contains(&path_avg));
}

#[test]
fn pad_average_sent_to_server_is_maximally_mixed() {
    let mut rng = ChaCha8Rng::seed_from_u64(405);
    let input = InputBlock::new(random_state_vector(1, &mut rng)).unwrap();
    let mut avg = nalgebra::DMatrix::zeros(8, 8);
    let mut count = 0.0;
    for secret in AliceSecret::enumerate_all(1) {
        let prepared = alice_prepare_with(&input, &secret).unwrap();
        avg += prepared.density().matrix();
        count += 1.0;
    }
    avg.unscale_mut(count);
    let avg_rho = DensityOperator::from_matrix(avg).unwrap();
    let dist = trace_distance(&avg_rho, &DensityOperator::maximally_mixed(3)).unwrap();
    assert!(dist < 1e-10, "blindness surrogate distance {dist:e}");
}

#[test]
fn input_test_inverse_chain_recovers_the_input_block() {
    let graph = ProtocolGraph::chain(3, 1).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(406);
    let input = InputBlock::new(random_state_vector(1, &mut rng)).unwrap();
    let target = input.full_state().density();
    for _ in 0..20 {
        let secret = AliceSecret::random(1, &mut rng);
        let padded = alice_prepare_with(&input, &secret).unwrap().density();
        let honest = bob_respond(&BobStrategy::Honest, &padded, &graph).unwrap();
        let recovered = input_test_corrected_state(&honest, &secret, &graph).unwrap();
        let dist = trace_distance(&recovered, &target).unwrap();
        assert!(dist < 1e-10, "inverse chain distance {dist:e}");
    }
}

#[test]
fn single_z_kick_is_caught_on_the_plus_trap() {
    // The server applies Z to one fixed input slot. Over the random
    // permutation the kick lands on the data (invisible to the test), the
    // |0⟩ trap (harmless), or the |+⟩ trap (always caught): pass rate 2/3.
    let graph = ProtocolGraph::chain(3, 1).unwrap();
    let z0 = PauliString::single(3, 0, Pauli::Z).unwrap().matrix();
    let strategy = BobStrategy::ChannelOnInput(vec![z0]);
    let input = one_input();
    let (p_g, p_psi) = exact_test_probabilities(&strategy, &input, &graph).unwrap();
    assert!((p_g - 1.0).abs() < 1e-10, "a coupled state still passes: {p_g}");
    assert!((p_psi - 2.0 / 3.0).abs() < 1e-10, "trap-hit rate: {p_psi}");
}

#[test]
fn replace_input_pass_rate_matches_enumeration_oracle() {
    // Independent oracle: the corrected block is P† pad |000⟩⟨000| pad P;
    // the |0⟩ trap survives iff the pad bit landing on source position 1
    // is 0 (probability 1/2 over pads) and the |+⟩ trap overlap is always
    // 1/2, giving 1/4 on average.
    let mut oracle = 0.0;
    let secrets = AliceSecret::enumerate_all(1);
    for secret in &secrets {
        let slot_of_zero_trap = secret.slot_of_source(1);
        let pass_zero = if secret.pad_x[slot_of_zero_trap] { 0.0 } else { 1.0 };
        oracle += pass_zero * 0.5;
    }
    oracle /= secrets.len() as f64;
    assert!((oracle - 0.25).abs() < 1e-12, "frozen oracle value 1/4");

    let graph = ProtocolGraph::chain(3, 1).unwrap();
    let substitute = StateVector::zero_state(3).density();
    let strategy = BobStrategy::ReplaceInput(substitute);
    let (p_g, p_psi) = exact_test_probabilities(&strategy, &one_input(), &graph).unwrap();
    assert!((p_g - 1.0).abs() < 1e-10);
    assert!((p_psi - oracle).abs() < 1e-10, "protocol {p_psi} vs oracle {oracle}");
}

#[test]
fn wrong_graph_fails_the_stabilizer_test() {
    let graph = ProtocolGraph::chain(3, 1).unwrap();
    let alt = ProtocolGraph::new(
        3,
        3,
        vec![(0, 1)], // dropped the (1,2) edge
        graph.connecting_edges().to_vec(),
        0,
    )
    .unwrap();
    let (p_g, p_psi) =
        exact_test_probabilities(&BobStrategy::WrongGraph(alt), &one_input(), &graph).unwrap();
    assert!(p_g < 1.0 - 1e-6, "broken coupling must be detectable: {p_g}");
    assert!(p_psi <= 1.0 + 1e-12);
}

#[test]
fn mixed_adversary_stab_rate_matches_exact_formula() {
    // sampled stabilizer-branch pass rate vs (1 + Tr(Λρ))/2 for the
    // maximally mixed register
    let graph = ProtocolGraph::chain(3, 1).unwrap();
    let input = one_input();
    let instance = DecisionInstance::amplified(10, WireProgram::identity()).unwrap();
    let mixed = DensityOperator::maximally_mixed(graph.total_qubits());
    let gens = graph.coupled_stabilizer_generators().unwrap();
    let exact = vbqc_core::stab::exact_pass_probability(&mixed, &gens).unwrap();
    assert!((exact - (1.0 + 0.125) / 2.0).abs() < 1e-12);
    let est = estimate_acceptance(
        &instance,
        &input,
        &graph,
        &BobStrategy::ArbitraryState(mixed),
        0.0,
        8000,
        31,
    )
    .unwrap();
    let se = est.se_gpass().max(1e-3);
    assert!(
        (est.p_gpass() - exact).abs() <= 5.0 * se,
        "sampled {} vs exact {exact}",
        est.p_gpass()
    );
}

#[test]
fn sampled_input_test_matches_exact_rate() {
    // dual route: the sampled 3-c branch against the exact
    // outcome-enumeration probability, on a fixed mixed register whose
    // corrected block is I/8 (trap overlap exactly 1/4)
    let graph = ProtocolGraph::chain(3, 1).unwrap();
    let input = one_input();
    let mixed = DensityOperator::maximally_mixed(graph.total_qubits());
    let (_, p_psi_exact) = exact_test_probabilities(
        &BobStrategy::ArbitraryState(mixed.clone()),
        &input,
        &graph,
    )
    .unwrap();
    assert!((p_psi_exact - 0.25).abs() < 1e-10, "I/8 trap overlap is 1/4");
    let mut rng = ChaCha8Rng::seed_from_u64(440);
    let trials = 6000usize;
    let mut accepts = 0usize;
    for _ in 0..trials {
        let secret = AliceSecret::random(1, &mut rng);
        let mut state = mixed.clone();
        if vbqc_core::protocol::branch_input_test(&mut state, &secret, &graph, &input, &mut rng)
            .unwrap()
        {
            accepts += 1;
        }
    }
    let freq = accepts as f64 / trials as f64;
    let se = (p_psi_exact * (1.0 - p_psi_exact) / trials as f64).sqrt();
    assert!(
        (freq - p_psi_exact).abs() <= 5.0 * se,
        "sampled {freq} vs exact {p_psi_exact}"
    );
}

#[test]
fn exact_compute_enumeration_on_mixed_register_is_unbiased() {
    // every measurement on I/2^n is a fair coin, so the corrected output
    // bit accepts with probability exactly 1/2 under any secret
    let graph = ProtocolGraph::chain(3, 1).unwrap();
    let mixed = DensityOperator::maximally_mixed(graph.total_qubits());
    let program = WireProgram::with_angles(vec![0.3, -0.8]);
    let mut rng = ChaCha8Rng::seed_from_u64(441);
    for _ in 0..5 {
        let secret = AliceSecret::random(1, &mut rng);
        let p = vbqc_core::protocol::exact_compute_acceptance_for_state(
            &mixed, &secret, &program, &graph,
        )
        .unwrap();
        assert!((p - 0.5).abs() < 1e-10, "mixed register must be uniform: {p}");
    }
}

#[test]
fn honest_acceptance_bound_holds_at_any_q() {
    // p_acc ≥ q·Pr[output = 1] + (1 − q) for the honest server
    let graph = ProtocolGraph::disjoint_wires(1, 2).unwrap();
    let input = one_input();
    let instance = DecisionInstance::amplified(10, WireProgram::identity()).unwrap();
    for (seed, q) in [(11u64, 0.25), (12, 0.5), (13, 0.9)] {
        let est = estimate_acceptance(
            &instance,
            &input,
            &graph,
            &BobStrategy::Honest,
            q,
            4000,
            seed,
        )
        .unwrap();
        // identity wire on |1⟩ accepts deterministically in every branch
        let alpha = q * 1.0 + (1.0 - q);
        assert!(
            est.p_acc() >= alpha - 5.0 * est.se_acc() - 1e-12,
            "p_acc {} below α {alpha}",
            est.p_acc()
        );
    }
}
