//! Exhaustive Pauli-twirl machinery behind the input-test soundness bound.
//!
//! Averaging the server's deviation channel over the one-time pad and the
//! slot permutation turns it into a mixture of permuted Pauli kicks on the
//! trap-extended input: cross terms between distinct Pauli components
//! cancel, the surviving weights D_β sum to 1, and the non-identity part
//! can overlap the intact-trap subspace by at most 2m(3m−1)!/(3m)! = 2/3.

use itertools::Itertools;
use num_complex::Complex64;

use crate::analysis::bounds::delta_of;
use crate::graph::ProtocolGraph;
use crate::protocol::secret::{alice_prepare_with, AliceSecret, InputBlock};
use crate::protocol::trial::input_test_pass_probability;
use crate::qsim::linalg::trace_product;
use crate::qsim::state::CMat;
use crate::qsim::{
    spectral_norm, trace_distance, DensityOperator, PauliString, QuantumState,
};
use crate::stab::exact_pass_probability;
use crate::{Error, Result};

/// All 4^n Pauli strings in lexicographic I < X < Y < Z order.
pub fn pauli_basis(n_qubits: usize) -> Vec<PauliString> {
    (0..(1usize << (2 * n_qubits)))
        .map(|i| PauliString::from_lex_index(n_qubits, i).expect("index in range"))
        .collect()
}

/// Hilbert-Schmidt decomposition M = Σ_β C_β σ_β with C_β = Tr(σ_β M)/2^n.
pub fn pauli_decompose(op: &CMat) -> Result<Vec<Complex64>> {
    let dim = op.nrows();
    if dim == 0 || !dim.is_power_of_two() || op.ncols() != dim {
        return Err(Error::BadParameter(format!(
            "Pauli decomposition needs a square 2^n matrix, got {}x{}",
            op.nrows(),
            op.ncols()
        )));
    }
    let n = dim.trailing_zeros() as usize;
    let scale = 1.0 / dim as f64;
    Ok(pauli_basis(n)
        .iter()
        .map(|sigma| {
            // Tr(σ M) walking σ's one nonzero entry per column
            let mut acc = Complex64::new(0.0, 0.0);
            for c in 0..dim {
                let (phase, r) = sigma.act_on_index(c);
                acc += phase * op[(c, r)];
            }
            acc * scale
        })
        .collect())
}

/// Rebuild a matrix from its Pauli coefficients.
pub fn pauli_reconstruct(n_qubits: usize, coeffs: &[Complex64]) -> CMat {
    let dim = 1usize << n_qubits;
    let mut out = CMat::zeros(dim, dim);
    for (idx, &c) in coeffs.iter().enumerate() {
        if c.norm_sqr() > 0.0 {
            let sigma = PauliString::from_lex_index(n_qubits, idx).expect("index in range");
            out += sigma.matrix() * c;
        }
    }
    out
}

fn check_kraus(kraus: &[CMat], dim: usize) -> Result<()> {
    if kraus.is_empty() {
        return Err(Error::BadKraus { deviation: 1.0 });
    }
    let mut sum = CMat::zeros(dim, dim);
    for e in kraus {
        if e.nrows() != dim || e.ncols() != dim {
            return Err(Error::SizeMismatch {
                expected: dim,
                got: e.nrows(),
            });
        }
        sum += e.adjoint() * e;
    }
    let dev = (sum - CMat::identity(dim, dim)).camax();
    if dev > crate::qsim::TOL_EIGEN {
        return Err(Error::BadKraus { deviation: dev });
    }
    Ok(())
}

fn enumerate_permutations(n: usize) -> Vec<Vec<usize>> {
    (0..n).permutations(n).collect()
}

/// The twirled state: the trap-extended input conjugated by every
/// (permutation, Pauli pad, Kraus) triple of the deviation, averaged.
/// Exhaustive over (3m)!·4^{3m} terms — instant at m = 1, minutes at
/// m = 2, and refused beyond.
pub fn rho_before_exact(kraus: &[CMat], input: &InputBlock) -> Result<DensityOperator> {
    let m = input.m();
    if m > 2 {
        return Err(Error::Infeasible(
            "exhaustive twirl enumeration is factorially expensive beyond m = 2".into(),
        ));
    }
    let block = 3 * m;
    let dim = 1usize << block;
    check_kraus(kraus, dim)?;
    let psi_full = input.full_state();
    let perms = enumerate_permutations(block);
    let paulis = pauli_basis(block);
    let mut acc = CMat::zeros(dim, dim);
    for perm in &perms {
        let inverse: Vec<usize> = {
            let mut inv = vec![0usize; block];
            for (src, &dst) in perm.iter().enumerate() {
                inv[dst] = src;
            }
            inv
        };
        let mut permuted = psi_full.clone();
        permuted.permute_qubits(perm)?;
        for sigma in &paulis {
            let mut padded = permuted.clone();
            padded.apply_pauli_string(sigma)?;
            for e in kraus {
                // v = P† σ E σ P |Ψ⟩ on the raw (subnormalized) vector,
                // accumulated as an outer product
                let w = e * padded.amplitudes();
                let mut tmp: nalgebra::DVector<Complex64> = nalgebra::DVector::zeros(dim);
                for c in 0..dim {
                    let (phase, r) = sigma.act_on_index(c);
                    tmp[r] = phase * w[c];
                }
                let mut out: nalgebra::DVector<Complex64> = nalgebra::DVector::zeros(dim);
                for s in 0..dim {
                    let mut d = 0usize;
                    for (j, &dest) in inverse.iter().enumerate() {
                        let bit = (s >> (block - 1 - j)) & 1;
                        d |= bit << (block - 1 - dest);
                    }
                    out[d] = tmp[s];
                }
                acc += &out * out.adjoint();
            }
        }
    }
    let total = (perms.len() * paulis.len()) as f64;
    acc.unscale_mut(total);
    Ok(DensityOperator::from_matrix_unchecked(block, acc))
}

/// The twirl split ρ_before = ρ₁ + ρ₂ with weights D_β = Σ_k |C_β^k|².
#[derive(Clone, Debug)]
pub struct TwirlDecomposition {
    /// D_β in lexicographic β order; Σ_β D_β = 1.
    pub d_weights: Vec<f64>,
    /// D₀ · Ψ, the undisturbed component.
    pub rho1: CMat,
    /// The permuted Pauli-kick mixture over β ≠ 0.
    pub rho2: CMat,
}

impl TwirlDecomposition {
    pub fn weight_sum(&self) -> f64 {
        self.d_weights.iter().sum()
    }
}

pub fn twirl_decomposition(kraus: &[CMat], input: &InputBlock) -> Result<TwirlDecomposition> {
    let m = input.m();
    if m > 2 {
        return Err(Error::Infeasible(
            "exhaustive twirl enumeration is factorially expensive beyond m = 2".into(),
        ));
    }
    let block = 3 * m;
    let dim = 1usize << block;
    check_kraus(kraus, dim)?;
    let mut d_weights = vec![0.0; 1 << (2 * block)];
    for e in kraus {
        for (idx, c) in pauli_decompose(e)?.into_iter().enumerate() {
            d_weights[idx] += c.norm_sqr();
        }
    }
    let psi_full = input.full_state();
    let rho1 = psi_full.density().matrix() * Complex64::new(d_weights[0], 0.0);
    let perms = enumerate_permutations(block);
    let mut rho2 = CMat::zeros(dim, dim);
    for perm in &perms {
        let mut permuted = psi_full.clone();
        permuted.permute_qubits(perm)?;
        let inverse: Vec<usize> = {
            let mut inv = vec![0usize; block];
            for (src, &dst) in perm.iter().enumerate() {
                inv[dst] = src;
            }
            inv
        };
        for (idx, &d) in d_weights.iter().enumerate().skip(1) {
            if d < 1e-16 {
                continue;
            }
            let sigma = PauliString::from_lex_index(block, idx)?;
            // w = P† σ_β P |Ψ⟩
            let mut kicked = permuted.clone();
            kicked.apply_pauli_string(&sigma)?;
            kicked.permute_qubits(&inverse)?;
            rho2 += kicked.density().matrix() * Complex64::new(d, 0.0);
        }
    }
    rho2.unscale_mut(perms.len() as f64);
    Ok(TwirlDecomposition {
        d_weights,
        rho1,
        rho2,
    })
}

/// Residual operator norm of Σ_α σ_α σ_β σ_α ρ σ_α σ_γ σ_α, which
/// vanishes for β ≠ γ. Equal indices are rejected: there the sum is
/// 4^n σ_β ρ σ_β.
pub fn verify_cross_term_cancellation(
    beta: &PauliString,
    gamma: &PauliString,
    test_state: &DensityOperator,
) -> Result<f64> {
    let n = test_state.n_qubits();
    if beta.n_qubits() != n || gamma.n_qubits() != n {
        return Err(Error::SizeMismatch {
            expected: n,
            got: beta.n_qubits(),
        });
    }
    if beta.lex_index() == gamma.lex_index() {
        return Err(Error::BadParameter(
            "cross-term cancellation needs β ≠ γ".into(),
        ));
    }
    let dim = 1usize << n;
    let rho = test_state.matrix();
    let bm = beta.matrix();
    let gm = gamma.matrix();
    let mut sum = CMat::zeros(dim, dim);
    for alpha in pauli_basis(n) {
        let am = alpha.matrix();
        sum += &am * &bm * &am * rho * &am * &gm * &am;
    }
    spectral_norm(&sum)
}

/// Tr[(I − ψ) ⊗ traps · ρ₂] against its combinatorial bound 2/3.
pub fn verify_rho2_bound(kraus: &[CMat], input: &InputBlock) -> Result<(f64, f64)> {
    let decomposition = twirl_decomposition(kraus, input)?;
    let lhs = trace_product(&damaged_data_observable(input), &decomposition.rho2).re;
    Ok((lhs, 2.0 / 3.0))
}

/// (I^{⊗m} − ψ) ⊗ |0⟩⟨0|^{⊗m} ⊗ |+⟩⟨+|^{⊗m}.
pub fn damaged_data_observable(input: &InputBlock) -> CMat {
    let dim_data = 1usize << input.m();
    let psi = input.psi().density();
    (CMat::identity(dim_data, dim_data) - psi.matrix())
        .kronecker(&crate::protocol::secret::trap_block_projector(input.m()))
}

/// Outcome of checking the twirl-level closeness bound
/// (1/2)‖ρ_before − Ψ‖₁ ≤ √(2/3 + ε).
#[derive(Clone, Copy, Debug)]
pub struct PsipassReport {
    /// Exact trap acceptance Tr[(I ⊗ traps) ρ_before].
    pub p_psipass: f64,
    /// Whether p_ψpass ≥ 1 − ε, the premise of the bound.
    pub premise_holds: bool,
    pub lhs: f64,
    pub rhs: f64,
}

pub fn verify_psipass_bound(
    kraus: &[CMat],
    input: &InputBlock,
    epsilon: f64,
) -> Result<PsipassReport> {
    if epsilon < 0.0 {
        return Err(Error::BadParameter(format!(
            "epsilon {epsilon} must be nonnegative"
        )));
    }
    let rho_before = rho_before_exact(kraus, input)?;
    let p_psipass = trace_product(&input.acceptance_observable(), rho_before.matrix()).re;
    let premise_holds = p_psipass >= 1.0 - epsilon;
    let lhs = trace_distance(&rho_before, &input.full_state().density())?;
    let rhs = (2.0 / 3.0 + epsilon).sqrt();
    Ok(PsipassReport {
        p_psipass,
        premise_holds,
        lhs,
        rhs,
    })
}

/// Tr[Ψ ρ_before] and the exact trap acceptance, for the final chain
/// Tr[Ψ ρ_before] ≥ p_ψpass − 2/3.
pub fn appendix_final_chain(kraus: &[CMat], input: &InputBlock) -> Result<(f64, f64)> {
    let rho_before = rho_before_exact(kraus, input)?;
    let overlap =
        trace_product(input.full_state().density().matrix(), rho_before.matrix()).re;
    let p_psipass = trace_product(&input.acceptance_observable(), rho_before.matrix()).re;
    Ok((overlap, p_psipass))
}

/// The combined soundness check for a fixed server state: with ε taken
/// from the measured pass rates, the distance to the honest coupled state
/// stays within δ(ε) for every secret.
#[derive(Clone, Copy, Debug)]
pub struct CombinedSoundnessReport {
    pub p_gpass: f64,
    pub p_psipass: f64,
    pub epsilon: f64,
    pub delta: f64,
    pub max_trace_distance: f64,
    pub holds: bool,
}

pub fn combined_soundness_check(
    rho: &DensityOperator,
    input: &InputBlock,
    graph: &ProtocolGraph,
) -> Result<CombinedSoundnessReport> {
    if input.m() != 1 {
        return Err(Error::Infeasible(
            "exhaustive secret enumeration is supported at m = 1".into(),
        ));
    }
    if rho.n_qubits() != graph.total_qubits() {
        return Err(Error::SizeMismatch {
            expected: graph.total_qubits(),
            got: rho.n_qubits(),
        });
    }
    let gens = graph.coupled_stabilizer_generators()?;
    let p_gpass = exact_pass_probability(rho, &gens)?;
    let secrets = AliceSecret::enumerate_all(input.m());
    let mut psi_acc = 0.0;
    let mut max_distance: f64 = 0.0;
    for secret in &secrets {
        psi_acc += input_test_pass_probability(rho, secret, graph, input)?;
        let honest = graph.attach_input(&alice_prepare_with(input, secret)?.density())?;
        max_distance = max_distance.max(trace_distance(rho, &honest)?);
    }
    let p_psipass = psi_acc / secrets.len() as f64;
    let epsilon = (1.0 - p_gpass).max(1.0 - p_psipass).clamp(0.0, 1.0);
    let delta = delta_of(epsilon)?;
    Ok(CombinedSoundnessReport {
        p_gpass,
        p_psipass,
        epsilon,
        delta,
        max_trace_distance: max_distance,
        holds: max_distance <= delta + 1e-10,
    })
}
