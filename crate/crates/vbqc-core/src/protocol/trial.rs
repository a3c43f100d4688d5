//! Trial orchestration: the three verification branches, per-trial
//! sampling, Monte-Carlo aggregation, and the exact probability paths the
//! soundness analysis compares against.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::graph::ProtocolGraph;
use crate::protocol::pattern::{
    execute_pattern, realize_wire_pattern, ByproductTable, WireProgram,
};
use crate::protocol::secret::{alice_prepare, alice_prepare_with, AliceSecret, InputBlock};
use crate::protocol::strategy::{bob_respond, bob_respond_pure, BobStrategy};
use crate::qsim::state::CMat;
use crate::qsim::{
    gates, measure_qubit_z, DensityOperator, QuantumState, Sign, StateVector,
};
use crate::stab::{lambda_projector, run_stabilizer_test};
use crate::{Error, Result};

/// The decision-problem instance: the wire program implementing it and the
/// promised acceptance thresholds a > b (amplified form a = 1−2^{−r},
/// b = 2^{−r}).
#[derive(Clone, Debug)]
pub struct DecisionInstance {
    pub program: WireProgram,
    pub a: f64,
    pub b: f64,
    pub r: u32,
}

impl DecisionInstance {
    pub fn amplified(r: u32, program: WireProgram) -> Result<Self> {
        if r == 0 {
            return Err(Error::BadParameter("amplification exponent must be ≥ 1".into()));
        }
        let b = 2f64.powi(-(r as i32));
        Ok(DecisionInstance {
            program,
            a: 1.0 - b,
            b,
            r,
        })
    }
}

/// Which step-3 branch a trial took.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Branch {
    Compute,
    StabTest,
    InputTest,
}

/// Branch-specific diagnostics of one trial.
#[derive(Clone, Debug)]
pub enum BranchDiagnostics {
    Compute { data_slot: usize },
    StabTest { subset_bits: Vec<bool>, outcome: Sign },
    InputTest,
}

/// Record of one protocol trial.
#[derive(Clone, Debug)]
pub struct TrialOutcome {
    pub branch: Branch,
    pub accepted: bool,
    pub secret_digest: u64,
    pub diagnostics: BranchDiagnostics,
}

enum ServerState {
    Pure(StateVector),
    Mixed(DensityOperator),
}

/// Branch 3-a: run the adaptive computation, absorbing the secret by
/// relabeling the data wire through the permutation and folding the pad
/// bits into the initial byproduct record. Accepts iff the corrected
/// output bit is 1.
pub fn branch_compute<S: QuantumState, R: Rng + ?Sized>(
    state: &mut S,
    secret: &AliceSecret,
    program: &WireProgram,
    graph: &ProtocolGraph,
    rng: &mut R,
) -> Result<(bool, usize)> {
    if graph.input_qubits() != 1 {
        return Err(Error::PatternMismatch(
            "the compute branch drives a single data wire (m = 1)".into(),
        ));
    }
    let data_slot = secret.slot_of_source(0);
    let (pattern, _) = realize_wire_pattern(graph, data_slot, program)?;
    let byproducts = ByproductTable::from_secret(graph, secret)?;
    let accepted = execute_pattern(state, &pattern, &byproducts, rng)?;
    Ok((accepted, data_slot))
}

/// Branch 3-c: Z-measure every graph vertex, kick a Z onto each input slot
/// whose matched vertex read 1, undo the pad and permutation, then check
/// the traps qubit by qubit (|0⟩ block in Z, |+⟩ block in X). Accepting
/// iff every trap is intact realizes the {Λ₀, I−Λ₀} measurement.
pub fn branch_input_test<S: QuantumState, R: Rng + ?Sized>(
    state: &mut S,
    secret: &AliceSecret,
    graph: &ProtocolGraph,
    input: &InputBlock,
    rng: &mut R,
) -> Result<bool> {
    let m = input.m();
    if graph.v2_count() != 3 * m || secret.block_qubits() != 3 * m {
        return Err(Error::SizeMismatch {
            expected: graph.v2_count(),
            got: 3 * m,
        });
    }
    let mut vertex_bits = vec![false; graph.v1_count()];
    for (v, bit) in vertex_bits.iter_mut().enumerate() {
        *bit = measure_qubit_z(state, graph.global_of_vertex(v), rng)?;
    }
    let z = gates::pauli_z();
    for j in 0..graph.v2_count() {
        let w = graph.matched_vertex_of_slot(j)?;
        if vertex_bits[w] {
            state.apply_single_qubit_gate(graph.global_of_slot(j), &z)?;
        }
    }
    secret.apply_pad_inverse(state)?;
    let mut ext_perm = secret.inverse_permutation();
    for v in 0..graph.v1_count() {
        ext_perm.push(3 * m + v);
    }
    state.permute_qubits(&ext_perm)?;
    // traps: source positions m..2m must be |0⟩, positions 2m..3m must be |+⟩
    let h = gates::hadamard();
    let mut accepted = true;
    for t in 0..m {
        if measure_qubit_z(state, m + t, rng)? {
            accepted = false;
        }
    }
    for t in 0..m {
        state.apply_single_qubit_gate(2 * m + t, &h)?;
        if measure_qubit_z(state, 2 * m + t, rng)? {
            accepted = false;
        }
    }
    Ok(accepted)
}

/// The state of the input block after the 3-c measurement-and-correction
/// chain, computed exactly by enumerating graph-vertex outcomes: project
/// V₁ onto each bit string, apply the conditional Z kicks, undo pad and
/// permutation. The result is the exact pre-trap-measurement state.
pub fn input_test_corrected_state(
    state: &DensityOperator,
    secret: &AliceSecret,
    graph: &ProtocolGraph,
) -> Result<DensityOperator> {
    if state.n_qubits() != graph.total_qubits() {
        return Err(Error::SizeMismatch {
            expected: graph.total_qubits(),
            got: state.n_qubits(),
        });
    }
    let nv = graph.v1_count();
    let block = graph.v2_count();
    let dim_block = 1usize << block;
    let dim_v1 = 1usize << nv;
    let mat = state.matrix();
    let mut sigma = CMat::zeros(dim_block, dim_block);
    for b in 0..dim_v1 {
        // slots whose matched vertex read 1 get a Z kick
        let mut kick_mask = 0usize;
        for j in 0..block {
            let w = graph.matched_vertex_of_slot(j)?;
            if (b >> (nv - 1 - w)) & 1 == 1 {
                kick_mask |= 1 << (block - 1 - j);
            }
        }
        for a in 0..dim_block {
            let sa = if (a & kick_mask).count_ones() % 2 == 1 {
                -1.0
            } else {
                1.0
            };
            for a2 in 0..dim_block {
                let sb = if (a2 & kick_mask).count_ones() % 2 == 1 {
                    -1.0
                } else {
                    1.0
                };
                sigma[(a, a2)] +=
                    mat[(a * dim_v1 + b, a2 * dim_v1 + b)] * num_complex::Complex64::new(sa * sb, 0.0);
            }
        }
    }
    let mut corrected = DensityOperator::from_matrix_unchecked(block, sigma);
    secret.unprepare(&mut corrected)?;
    Ok(corrected)
}

/// Exact branch 3-c pass probability for a server state under one secret.
pub fn input_test_pass_probability(
    state: &DensityOperator,
    secret: &AliceSecret,
    graph: &ProtocolGraph,
    input: &InputBlock,
) -> Result<f64> {
    let corrected = input_test_corrected_state(state, secret, graph)?;
    let observable = input.acceptance_observable();
    Ok(crate::qsim::linalg::trace_product(&observable, corrected.matrix()).re)
}

/// Exact stabilizer-test and input-test pass probabilities of a strategy,
/// averaged over every (permutation, pad) secret. Exhaustive; m = 1 only.
pub fn exact_test_probabilities(
    strategy: &BobStrategy,
    input: &InputBlock,
    graph: &ProtocolGraph,
) -> Result<(f64, f64)> {
    if input.m() != 1 {
        return Err(Error::Infeasible(
            "exhaustive secret enumeration is supported at m = 1".into(),
        ));
    }
    strategy.validate(graph)?;
    let gens = graph.coupled_stabilizer_generators()?;
    let lambda = lambda_projector(&gens)?;
    let secrets = AliceSecret::enumerate_all(input.m());
    let total = secrets.len() as f64;
    let (mut g_acc, mut psi_acc) = (0.0, 0.0);
    for secret in &secrets {
        let padded = alice_prepare_with(input, secret)?.density();
        let rho = bob_respond(strategy, &padded, graph)?;
        g_acc += (1.0 + lambda.expectation(&rho)?) / 2.0;
        psi_acc += input_test_pass_probability(&rho, secret, graph, input)?;
    }
    Ok((g_acc / total, psi_acc / total))
}

/// The secret-averaged corrected input-block state: the protocol-path
/// counterpart of the twirl formula. Exhaustive; m = 1 only.
pub fn rho_before_protocol_path(
    strategy: &BobStrategy,
    input: &InputBlock,
    graph: &ProtocolGraph,
) -> Result<DensityOperator> {
    if input.m() != 1 {
        return Err(Error::Infeasible(
            "exhaustive secret enumeration is supported at m = 1".into(),
        ));
    }
    strategy.validate(graph)?;
    let dim = 1usize << graph.v2_count();
    let mut acc = CMat::zeros(dim, dim);
    let secrets = AliceSecret::enumerate_all(input.m());
    for secret in &secrets {
        let padded = alice_prepare_with(input, secret)?.density();
        let rho = bob_respond(strategy, &padded, graph)?;
        acc += input_test_corrected_state(&rho, secret, graph)?.matrix();
    }
    acc.unscale_mut(secrets.len() as f64);
    Ok(DensityOperator::from_matrix_unchecked(graph.v2_count(), acc))
}

/// One full protocol trial: fresh secret, server response, then one of the
/// three branches with probabilities (q, (1−q)/2, (1−q)/2). The server's
/// state is fixed before the branch is drawn; nothing after step 1 flows
/// back toward the server.
pub fn run_trial<R: Rng + ?Sized>(
    instance: &DecisionInstance,
    input: &InputBlock,
    graph: &ProtocolGraph,
    strategy: &BobStrategy,
    q: f64,
    rng: &mut R,
) -> Result<TrialOutcome> {
    if !(0.0..=1.0).contains(&q) {
        return Err(Error::BadParameter(format!("q = {q} outside [0, 1]")));
    }
    if graph.v2_count() != input.block_qubits() {
        return Err(Error::SizeMismatch {
            expected: graph.v2_count(),
            got: input.block_qubits(),
        });
    }
    let (padded, secret) = alice_prepare(input, rng)?;
    let mut server = if strategy.has_pure_response() {
        ServerState::Pure(bob_respond_pure(strategy, &padded, graph)?)
    } else {
        ServerState::Mixed(bob_respond(strategy, &padded.density(), graph)?)
    };
    let u: f64 = rng.gen();
    let branch = if u < q {
        Branch::Compute
    } else if u < q + (1.0 - q) / 2.0 {
        Branch::StabTest
    } else {
        Branch::InputTest
    };
    let secret_digest = secret.digest();
    let (accepted, diagnostics) = match branch {
        Branch::Compute => {
            let (acc, data_slot) = match &mut server {
                ServerState::Pure(s) => {
                    branch_compute(s, &secret, &instance.program, graph, rng)?
                }
                ServerState::Mixed(s) => {
                    branch_compute(s, &secret, &instance.program, graph, rng)?
                }
            };
            (acc, BranchDiagnostics::Compute { data_slot })
        }
        Branch::StabTest => {
            let gens = graph.coupled_stabilizer_generators()?;
            let record = match &mut server {
                ServerState::Pure(s) => run_stabilizer_test(s, &gens, rng)?,
                ServerState::Mixed(s) => run_stabilizer_test(s, &gens, rng)?,
            };
            (
                record.passed,
                BranchDiagnostics::StabTest {
                    subset_bits: record.subset_bits,
                    outcome: record.outcome,
                },
            )
        }
        Branch::InputTest => {
            let acc = match &mut server {
                ServerState::Pure(s) => branch_input_test(s, &secret, graph, input, rng)?,
                ServerState::Mixed(s) => branch_input_test(s, &secret, graph, input, rng)?,
            };
            (acc, BranchDiagnostics::InputTest)
        }
    };
    Ok(TrialOutcome {
        branch,
        accepted,
        secret_digest,
        diagnostics,
    })
}

/// Monte-Carlo aggregate over independent trials.
#[derive(Clone, Copy, Debug, Default)]
pub struct AcceptanceEstimate {
    pub trials: usize,
    pub accepted: usize,
    pub compute_trials: usize,
    pub compute_accepts: usize,
    pub stab_trials: usize,
    pub stab_accepts: usize,
    pub input_trials: usize,
    pub input_accepts: usize,
}

fn rate(accepts: usize, trials: usize) -> f64 {
    if trials == 0 {
        f64::NAN
    } else {
        accepts as f64 / trials as f64
    }
}

fn standard_error(p: f64, trials: usize) -> f64 {
    if trials == 0 || p.is_nan() {
        f64::NAN
    } else {
        (p * (1.0 - p) / trials as f64).sqrt()
    }
}

impl AcceptanceEstimate {
    pub fn p_acc(&self) -> f64 {
        rate(self.accepted, self.trials)
    }

    pub fn se_acc(&self) -> f64 {
        standard_error(self.p_acc(), self.trials)
    }

    pub fn p_compute(&self) -> f64 {
        rate(self.compute_accepts, self.compute_trials)
    }

    pub fn se_compute(&self) -> f64 {
        standard_error(self.p_compute(), self.compute_trials)
    }

    pub fn p_gpass(&self) -> f64 {
        rate(self.stab_accepts, self.stab_trials)
    }

    pub fn se_gpass(&self) -> f64 {
        standard_error(self.p_gpass(), self.stab_trials)
    }

    pub fn p_psipass(&self) -> f64 {
        rate(self.input_accepts, self.input_trials)
    }

    pub fn se_psipass(&self) -> f64 {
        standard_error(self.p_psipass(), self.input_trials)
    }

    fn absorb(mut self, outcome: &TrialOutcome) -> Self {
        self.trials += 1;
        self.accepted += usize::from(outcome.accepted);
        match outcome.branch {
            Branch::Compute => {
                self.compute_trials += 1;
                self.compute_accepts += usize::from(outcome.accepted);
            }
            Branch::StabTest => {
                self.stab_trials += 1;
                self.stab_accepts += usize::from(outcome.accepted);
            }
            Branch::InputTest => {
                self.input_trials += 1;
                self.input_accepts += usize::from(outcome.accepted);
            }
        }
        self
    }

    fn merge(mut self, other: Self) -> Self {
        self.trials += other.trials;
        self.accepted += other.accepted;
        self.compute_trials += other.compute_trials;
        self.compute_accepts += other.compute_accepts;
        self.stab_trials += other.stab_trials;
        self.stab_accepts += other.stab_accepts;
        self.input_trials += other.input_trials;
        self.input_accepts += other.input_accepts;
        self
    }
}

/// Per-trial RNG: one ChaCha stream per trial index over the master seed,
/// so parallel and serial runs aggregate identically.
pub fn trial_rng(master_seed: u64, trial_index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(trial_index);
    rng
}

/// Run `trials` independent trials in parallel and aggregate.
pub fn estimate_acceptance(
    instance: &DecisionInstance,
    input: &InputBlock,
    graph: &ProtocolGraph,
    strategy: &BobStrategy,
    q: f64,
    trials: usize,
    master_seed: u64,
) -> Result<AcceptanceEstimate> {
    if trials == 0 {
        return Err(Error::BadParameter("trials must be ≥ 1".into()));
    }
    strategy.validate(graph)?;
    (0..trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = trial_rng(master_seed, i as u64);
            run_trial(instance, input, graph, strategy, q, &mut rng)
        })
        .try_fold(AcceptanceEstimate::default, |acc, outcome| {
            outcome.map(|o| acc.absorb(&o))
        })
        .try_reduce(AcceptanceEstimate::default, |a, b| Ok(a.merge(b)))
}

/// Exact compute-branch acceptance probability for an arbitrary server
/// state under one secret, by enumerating every measurement outcome path
/// of the realized pattern. Exponential in the step count; guarded.
pub fn exact_compute_acceptance_for_state(
    state: &DensityOperator,
    secret: &AliceSecret,
    program: &WireProgram,
    graph: &ProtocolGraph,
) -> Result<f64> {
    if graph.input_qubits() != 1 {
        return Err(Error::PatternMismatch(
            "the compute branch drives a single data wire (m = 1)".into(),
        ));
    }
    if graph.total_qubits() > 8 {
        return Err(Error::Infeasible(
            "outcome-path enumeration is limited to 8 qubits".into(),
        ));
    }
    let data_slot = secret.slot_of_source(0);
    let (pattern, _) = realize_wire_pattern(graph, data_slot, program)?;
    let byproducts = ByproductTable::from_secret(graph, secret)?;

    struct Walker<'a> {
        pattern: &'a crate::protocol::pattern::MeasurementPattern,
        byproducts: &'a ByproductTable,
    }
    impl Walker<'_> {
        fn descend(
            &self,
            state: DensityOperator,
            weight: f64,
            step_idx: usize,
            outcomes: &mut Vec<bool>,
        ) -> Result<f64> {
            use crate::protocol::pattern::MeasurementBasis;
            if weight < crate::qsim::PROB_FLOOR {
                return Ok(0.0);
            }
            if step_idx == self.pattern.steps.len() {
                let raw_p1 = state.prob_qubit_one(self.pattern.output_vertex)?;
                let mut flip = self.byproducts.bx[self.pattern.output_vertex];
                for &d in &self.pattern.output_x_deps {
                    flip ^= outcomes[d];
                }
                let p_accept = if flip { 1.0 - raw_p1 } else { raw_p1 };
                return Ok(weight * p_accept);
            }
            let step = &self.pattern.steps[step_idx];
            let mut sx = self.byproducts.bx[step.vertex];
            for &d in &step.x_deps {
                sx ^= outcomes[d];
            }
            let mut sz = self.byproducts.bz[step.vertex];
            for &d in &step.z_deps {
                sz ^= outcomes[d];
            }
            let measured = match step.basis {
                MeasurementBasis::XyPlane { angle } => {
                    let adapted = if sx { -angle } else { angle }
                        + if sz { std::f64::consts::PI } else { 0.0 };
                    let mut s = state;
                    s.apply_single_qubit_gate(step.vertex, &gates::xy_eigenbasis(adapted).adjoint())?;
                    s
                }
                MeasurementBasis::ComputationalZ => state,
            };
            let p1 = measured.prob_qubit_one(step.vertex)?;
            let mut total = 0.0;
            for raw in [false, true] {
                let p = if raw { p1 } else { 1.0 - p1 };
                if p * weight < crate::qsim::PROB_FLOOR {
                    continue;
                }
                let mut branch_state = measured.clone();
                branch_state.project_qubit_z(step.vertex, raw)?;
                let recorded = match step.basis {
                    MeasurementBasis::XyPlane { .. } => raw,
                    MeasurementBasis::ComputationalZ => raw ^ sx,
                };
                outcomes.push(recorded);
                total += self.descend(branch_state, weight * p, step_idx + 1, outcomes)?;
                outcomes.pop();
            }
            Ok(total)
        }
    }
    let walker = Walker {
        pattern: &pattern,
        byproducts: &byproducts,
    };
    walker.descend(state.clone(), 1.0, 0, &mut Vec::new())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn honest_tests_pass_exactly() {
        let graph = ProtocolGraph::chain(3, 1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(61);
        let input =
            InputBlock::new(crate::qsim::random::random_state_vector(1, &mut rng)).unwrap();
        let (p_g, p_psi) =
            exact_test_probabilities(&BobStrategy::Honest, &input, &graph).unwrap();
        assert_abs_diff_eq!(p_g, 1.0, epsilon = 1e-10);
        assert_abs_diff_eq!(p_psi, 1.0, epsilon = 1e-10);
    }

    #[test]
    fn q_extremes_route_branches() {
        let graph = ProtocolGraph::chain(3, 1).unwrap();
        let input = InputBlock::new(StateVector::basis_state(1, 1).unwrap()).unwrap();
        let instance = DecisionInstance::amplified(8, WireProgram::identity()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(62);
        for _ in 0..16 {
            let out = run_trial(&instance, &input, &graph, &BobStrategy::Honest, 1.0, &mut rng)
                .unwrap();
            assert_eq!(out.branch, Branch::Compute);
        }
        let mut stab = 0;
        let mut inp = 0;
        for _ in 0..200 {
            let out = run_trial(&instance, &input, &graph, &BobStrategy::Honest, 0.0, &mut rng)
                .unwrap();
            match out.branch {
                Branch::Compute => panic!("q=0 must never compute"),
                Branch::StabTest => stab += 1,
                Branch::InputTest => inp += 1,
            }
        }
        assert!(stab > 60 && inp > 60, "stab={stab} input={inp}");
    }

    #[test]
    fn trial_rng_streams_are_deterministic() {
        let mut a = trial_rng(7, 3);
        let mut b = trial_rng(7, 3);
        assert_eq!(a.gen::<u64>(), b.gen::<u64>());
        let mut c = trial_rng(7, 4);
        assert_ne!(a.gen::<u64>(), c.gen::<u64>(), "distinct streams diverge");
    }

    #[test]
    fn one_sample_estimate_is_degenerate() {
        let graph = ProtocolGraph::chain(3, 1).unwrap();
        let input = InputBlock::new(StateVector::basis_state(1, 1).unwrap()).unwrap();
        let instance = DecisionInstance::amplified(8, WireProgram::identity()).unwrap();
        let est = estimate_acceptance(
            &instance,
            &input,
            &graph,
            &BobStrategy::Honest,
            0.5,
            1,
            99,
        )
        .unwrap();
        assert_eq!(est.trials, 1);
        assert!(est.p_acc() == 0.0 || est.p_acc() == 1.0);
    }

    #[test]
    fn parallel_and_serial_aggregation_agree() {
        let graph = ProtocolGraph::chain(3, 1).unwrap();
        let input = InputBlock::new(StateVector::basis_state(1, 1).unwrap()).unwrap();
        let instance = DecisionInstance::amplified(8, WireProgram::identity()).unwrap();
        let strategy = BobStrategy::ArbitraryState(DensityOperator::maximally_mixed(6));
        let parallel =
            estimate_acceptance(&instance, &input, &graph, &strategy, 0.4, 300, 5).unwrap();
        let mut serial = AcceptanceEstimate::default();
        for i in 0..300u64 {
            let mut rng = trial_rng(5, i);
            let outcome = run_trial(&instance, &input, &graph, &strategy, 0.4, &mut rng).unwrap();
            serial = serial.absorb(&outcome);
        }
        assert_eq!(parallel.accepted, serial.accepted);
        assert_eq!(parallel.compute_trials, serial.compute_trials);
        assert_eq!(parallel.stab_accepts, serial.stab_accepts);
        assert_eq!(parallel.input_accepts, serial.input_accepts);
    }

    #[test]
    fn server_state_fixed_before_branch_choice() {
        // With one seed, trials at different q consume identical draws for
        // the secret, so the server sees the same state regardless of the
        // branch chosen afterwards.
        let graph = ProtocolGraph::chain(3, 1).unwrap();
        let input = InputBlock::new(StateVector::basis_state(1, 1).unwrap()).unwrap();
        let instance = DecisionInstance::amplified(8, WireProgram::identity()).unwrap();
        let digest_at = |q: f64| {
            let mut rng = trial_rng(1234, 0);
            run_trial(&instance, &input, &graph, &BobStrategy::Honest, q, &mut rng)
                .unwrap()
                .secret_digest
        };
        assert_eq!(digest_at(0.0), digest_at(1.0));
    }
}
