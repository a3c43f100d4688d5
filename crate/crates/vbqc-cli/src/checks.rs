//! The verify-bounds and twirl-check invariant suites: every registered
//! inequality printed with its measured sides, nonzero exit on violation.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use vbqc_core::analysis::{
    bound_set, pauli_basis, rho_before_exact, twirl_decomposition,
    verify_cross_term_cancellation, verify_psipass_bound, verify_rho2_bound, RateParams,
};
use vbqc_core::graph::StabilizerGeneratorSet;
use vbqc_core::protocol::{
    exact_test_probabilities, rho_before_protocol_path, AliceSecret, BobStrategy,
};
use vbqc_core::qsim::linalg::trace_product;
use vbqc_core::qsim::random::{
    random_density_operator, random_kraus_channel, random_povm_element, random_state_vector,
};
use vbqc_core::qsim::{
    trace_distance, CMat, DensityOperator, Pauli, PauliString, QuantumState, StateVector,
};
use vbqc_core::stab::{
    closeness_envelope, conditioned_state, gentle_measurement_check, lambda_projector,
    pass_probability_by_enumeration, pass_probability_by_projector,
};

use crate::config::ExperimentConfig;
use crate::CliError;

struct Reporter {
    failures: usize,
}

impl Reporter {
    fn new() -> Self {
        Reporter { failures: 0 }
    }

    fn check(&mut self, name: &str, ok: bool, detail: String) {
        if ok {
            println!("ok   {name}: {detail}");
        } else {
            println!("FAIL {name}: {detail}");
            self.failures += 1;
        }
    }

    fn finish(self, suite: &str) -> Result<(), CliError> {
        if self.failures == 0 {
            println!("{suite}: all checks passed");
            Ok(())
        } else {
            Err(CliError::invariant(format!(
                "{suite}: {} check(s) failed",
                self.failures
            )))
        }
    }
}

fn high_pass_state<R: Rng>(
    gens: &StabilizerGeneratorSet,
    epsilon: f64,
    rng: &mut R,
) -> DensityOperator {
    let lambda = lambda_projector(gens).unwrap();
    let n = gens.n_qubits();
    let stabilized = loop {
        let raw = random_state_vector(n, rng);
        let projected = lambda.matrix() * raw.amplitudes();
        let norm = projected.norm();
        if norm > 1e-3 {
            break StateVector::from_amplitudes(projected.iter().map(|a| a / norm).collect())
                .unwrap();
        }
    };
    let junk = random_density_operator(n, rng);
    let w = epsilon * rng.gen::<f64>();
    DensityOperator::from_matrix(
        stabilized.density().matrix() * num_complex::Complex64::new(1.0 - w, 0.0)
            + junk.matrix() * num_complex::Complex64::new(w, 0.0),
    )
    .unwrap()
}

pub fn cmd_verify_bounds(cfg: &ExperimentConfig, seed: u64) -> Result<(), CliError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rep = Reporter::new();
    let graph = cfg.build_graph()?;

    // p_pass identity: subset enumeration vs (1 + Tr(Λρ))/2
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let gens = StabilizerGeneratorSet::random(3, 2, &mut rng);
        let rho = random_density_operator(3, &mut rng);
        let a = pass_probability_by_enumeration(&rho, &gens).unwrap();
        let b = pass_probability_by_projector(&rho, &gens).unwrap();
        worst = worst.max((a - b).abs());
    }
    rep.check(
        "p-pass-identity",
        worst <= 1e-10,
        format!("max |enumeration − projector| = {worst:.3e} (tolerance 1e-10)"),
    );

    // gentle measurement bound
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..20 {
        let gens = StabilizerGeneratorSet::random(3, 2, &mut rng);
        let rho = random_density_operator(3, &mut rng);
        let (lhs, rhs) = gentle_measurement_check(&rho, &gens).unwrap();
        worst = worst.max(lhs - rhs);
    }
    rep.check(
        "gentle-measurement",
        worst <= 1e-10,
        format!("max (lhs − rhs) = {worst:.3e} (must be ≤ 1e-10)"),
    );

    // closeness envelope on high-pass states
    let mut violations = 0;
    for i in 0..30 {
        let epsilon = [0.01, 0.05, 0.1][i % 3];
        let gens = StabilizerGeneratorSet::random(3, 2, &mut rng);
        let rho = high_pass_state(&gens, epsilon, &mut rng);
        if pass_probability_by_projector(&rho, &gens).unwrap() < 1.0 - epsilon {
            continue;
        }
        let sigma = conditioned_state(&rho, &gens).unwrap();
        let m = random_povm_element(3, &mut rng);
        let env = closeness_envelope(&m, &sigma, epsilon).unwrap();
        let t = m.expectation(&rho).unwrap();
        if t < env.lower - 1e-10 || t > env.upper + 1e-10 {
            violations += 1;
        }
    }
    rep.check(
        "closeness-envelope",
        violations == 0,
        format!("{violations} of 30 instances outside the two-sided bound"),
    );

    // trace distance is a metric
    let mut ok = true;
    for _ in 0..10 {
        let a = random_density_operator(2, &mut rng);
        let b = random_density_operator(2, &mut rng);
        let c = random_density_operator(2, &mut rng);
        let dab = trace_distance(&a, &b).unwrap();
        ok &= (dab - trace_distance(&b, &a).unwrap()).abs() <= 1e-10;
        ok &= dab <= trace_distance(&a, &c).unwrap() + trace_distance(&c, &b).unwrap() + 1e-10;
        ok &= trace_distance(&a, &a).unwrap() <= 1e-10;
    }
    rep.check(
        "trace-distance-metric",
        ok,
        "symmetry, triangle inequality, identity on 10 random triples".into(),
    );

    // CPTP monotonicity
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..10 {
        let rho = random_density_operator(2, &mut rng);
        let sigma = random_density_operator(2, &mut rng);
        let kraus = random_kraus_channel(2, 3, &mut rng);
        let before = trace_distance(&rho, &sigma).unwrap();
        let after = trace_distance(
            &rho.apply_channel(&kraus).unwrap(),
            &sigma.apply_channel(&kraus).unwrap(),
        )
        .unwrap();
        worst = worst.max(after - before);
    }
    rep.check(
        "cptp-monotonicity",
        worst <= 1e-10,
        format!("max contraction violation = {worst:.3e}"),
    );

    // coupled generators stabilize arbitrary inputs on the config graph
    let gens = graph
        .coupled_stabilizer_generators()
        .map_err(|e| CliError::config(format!("{e}")))?;
    let mut worst = 0.0f64;
    for _ in 0..5 {
        let sigma = random_density_operator(graph.v2_count(), &mut rng);
        let coupled = graph
            .attach_input(&sigma)
            .map_err(|e| CliError::config(format!("{e}")))?;
        for g in gens.generators() {
            worst = worst.max((coupled.expectation_pauli(g).unwrap() - 1.0).abs());
        }
    }
    rep.check(
        "coupled-generators",
        worst <= 1e-10,
        format!("max |⟨g⟩ − 1| = {worst:.3e} over 5 random inputs"),
    );

    // exact honest completeness on the config graph
    if cfg.m == 1 {
        let input = cfg.build_input()?;
        let (p_g, p_psi) =
            exact_test_probabilities(&BobStrategy::Honest, &input, &graph).unwrap();
        rep.check(
            "honest-completeness",
            (p_g - 1.0).abs() <= 1e-10 && (p_psi - 1.0).abs() <= 1e-10,
            format!("p_Gpass = {p_g}, p_ψpass = {p_psi} (both must be 1)"),
        );

        // blindness surrogate: pad average is maximally mixed
        let mut avg = CMat::zeros(8, 8);
        let all = AliceSecret::enumerate_all(1);
        for secret in &all {
            avg += vbqc_core::protocol::alice_prepare_with(&input, secret)
                .unwrap()
                .density()
                .matrix();
        }
        avg.unscale_mut(all.len() as f64);
        let dist = trace_distance(
            &DensityOperator::from_matrix(avg).unwrap(),
            &DensityOperator::maximally_mixed(3),
        )
        .unwrap();
        rep.check(
            "blindness-pad-average",
            dist <= 1e-10,
            format!("trace distance to I/8 = {dist:.3e}"),
        );
    } else {
        println!("skip honest-completeness, blindness-pad-average: exhaustive checks need m = 1");
    }

    // rate algebra identities
    let mut worst = 0.0f64;
    for i in 0..=100 {
        let q = i as f64 / 100.0;
        let params = RateParams::amplified(0.002, q, cfg.r).unwrap();
        let set = bound_set(&params).unwrap();
        let d1 = q * (params.a - 1.0) + params.epsilon * (1.0 - q) / 2.0;
        let d3 = q * (params.a - params.b - set.delta);
        worst = worst.max((set.delta1 - d1).abs()).max((set.delta3 - d3).abs());
    }
    rep.check(
        "rate-algebra",
        worst <= 1e-12,
        format!("max identity deviation on the q grid = {worst:.3e}"),
    );

    // negative control: a non-commuting generator set must be rejected
    let bad = StabilizerGeneratorSet::new(vec![
        PauliString::single(2, 0, Pauli::X).unwrap(),
        PauliString::single(2, 0, Pauli::Z).unwrap(),
    ]);
    rep.check(
        "generator-validation",
        matches!(bad, Err(vbqc_core::Error::NonCommuting(0, 1))),
        "deliberately corrupted (non-commuting) set rejected by the commutation check".into(),
    );

    rep.finish("verify-bounds")
}

pub fn cmd_twirl_check(cfg: &ExperimentConfig, seed: u64) -> Result<(), CliError> {
    if cfg.m != 1 {
        return Err(CliError::config(
            "twirl-check enumerates every secret; it needs m = 1",
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rep = Reporter::new();
    let graph = cfg.build_graph()?;
    let input = cfg.build_input()?;

    let mut channels: Vec<Vec<CMat>> = (0..20)
        .map(|i| random_kraus_channel(3, 1 + i % 4, &mut rng))
        .collect();

    // Σ_β D_β = 1
    let mut worst = 0.0f64;
    for kraus in &channels {
        let dec = twirl_decomposition(kraus, &input).unwrap();
        worst = worst.max((dec.weight_sum() - 1.0).abs());
    }
    rep.check(
        "weight-normalization",
        worst <= 1e-10,
        format!("max |ΣD_β − 1| = {worst:.3e} over 20 random channels"),
    );

    // cross-term cancellation on 2 qubits
    let basis = pauli_basis(2);
    let probe = random_density_operator(2, &mut rng);
    let mut worst = 0.0f64;
    for (i, beta) in basis.iter().enumerate() {
        for (j, gamma) in basis.iter().enumerate() {
            if i != j {
                worst =
                    worst.max(verify_cross_term_cancellation(beta, gamma, &probe).unwrap());
            }
        }
    }
    rep.check(
        "cross-term-cancellation",
        worst <= 1e-10,
        format!("max residual over all β≠γ = {worst:.3e}"),
    );

    // ρ₂ trap bound over all single-Pauli channels and the random ones
    for idx in 1..64usize {
        channels.push(vec![PauliString::from_lex_index(3, idx).unwrap().matrix()]);
    }
    let mut worst = 0.0f64;
    for kraus in &channels {
        let (lhs, _) = verify_rho2_bound(kraus, &input).unwrap();
        worst = worst.max(lhs);
    }
    rep.check(
        "rho2-trap-bound",
        worst <= 2.0 / 3.0 + 1e-10,
        format!("max Tr[(I−ψ)⊗traps·ρ₂] = {worst:.6} ≤ 2/3"),
    );

    // twirl-level closeness at the exact trap failure rate
    let mut worst = f64::NEG_INFINITY;
    for kraus in &channels {
        let rho_before = rho_before_exact(kraus, &input).unwrap();
        let p_psipass = trace_product(&input.acceptance_observable(), rho_before.matrix()).re;
        let report =
            verify_psipass_bound(kraus, &input, (1.0 - p_psipass).max(0.0) + 1e-12).unwrap();
        worst = worst.max(report.lhs - report.rhs);
    }
    rep.check(
        "twirl-closeness",
        worst <= 1e-10,
        format!("max (distance − √(2/3+ε)) = {worst:.3e}"),
    );

    // final chain: Tr[Ψ ρ_before] ≥ 1/3 − ε
    let mut worst = f64::NEG_INFINITY;
    for kraus in &channels {
        let rho_before = rho_before_exact(kraus, &input).unwrap();
        let p_psipass = trace_product(&input.acceptance_observable(), rho_before.matrix()).re;
        let overlap =
            trace_product(input.full_state().density().matrix(), rho_before.matrix()).re;
        let epsilon = (1.0 - p_psipass).max(0.0);
        worst = worst.max((1.0 / 3.0 - epsilon) - overlap);
    }
    rep.check(
        "final-chain",
        worst <= 1e-10,
        format!("max (1/3 − ε − Tr[Ψρ_before]) = {worst:.3e}"),
    );

    // the appendix formula against the protocol-path computation
    let mut worst = 0.0f64;
    for kraus in channels.iter().take(3) {
        let formula = rho_before_exact(kraus, &input).unwrap();
        let protocol =
            rho_before_protocol_path(&BobStrategy::ChannelOnInput(kraus.clone()), &input, &graph)
                .unwrap();
        worst = worst.max(trace_distance(&formula, &protocol).unwrap());
    }
    rep.check(
        "formula-vs-protocol",
        worst <= 1e-10,
        format!("max trace distance between the two routes = {worst:.3e}"),
    );

    rep.finish("twirl-check")
}
