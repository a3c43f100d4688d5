//! Step-1 client-side preparation: the secret qubit permutation and
//! one-time Pauli pad applied to the trap-extended input block.

use itertools::Itertools;
use rand::Rng;

use crate::qsim::state::CMat;
use crate::qsim::{gates, QuantumState, StateVector};
use crate::{Error, Result};

/// The m-qubit computation input together with its trap extension
/// |Ψ⟩ = |ψ⟩ ⊗ |0⟩^{⊗m} ⊗ |+⟩^{⊗m} on 3m qubits.
#[derive(Clone, Debug)]
pub struct InputBlock {
    psi: StateVector,
    m: usize,
}

impl InputBlock {
    pub fn new(psi: StateVector) -> Result<Self> {
        let m = psi.n_qubits();
        if m == 0 {
            return Err(Error::BadParameter("input needs at least one qubit".into()));
        }
        Ok(InputBlock { psi, m })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// 3m.
    pub fn block_qubits(&self) -> usize {
        3 * self.m
    }

    pub fn psi(&self) -> &StateVector {
        &self.psi
    }

    /// |Ψ⟩ = |ψ⟩ ⊗ |0⟩^{⊗m} ⊗ |+⟩^{⊗m}.
    pub fn full_state(&self) -> StateVector {
        self.psi
            .kron(&StateVector::zero_state(self.m))
            .kron(&StateVector::plus_state(self.m))
    }

    /// |0⟩⟨0|^{⊗m} ⊗ |+⟩⟨+|^{⊗m} on the last 2m qubits.
    pub fn trap_projector(&self) -> CMat {
        trap_block_projector(self.m)
    }

    /// The input-test acceptance observable on the whole 3m-qubit block:
    /// I^{⊗m} ⊗ |0⟩⟨0|^{⊗m} ⊗ |+⟩⟨+|^{⊗m}.
    pub fn acceptance_observable(&self) -> CMat {
        let dim_data = 1usize << self.m;
        CMat::identity(dim_data, dim_data).kronecker(&self.trap_projector())
    }
}

/// |0⟩⟨0|^{⊗m} ⊗ |+⟩⟨+|^{⊗m}, dimension 4^m.
pub fn trap_block_projector(m: usize) -> CMat {
    let zeros = StateVector::zero_state(m).density();
    let pluses = StateVector::plus_state(m).density();
    zeros.matrix().kronecker(pluses.matrix())
}

/// The per-trial secret: a qubit permutation P (source j moves to slot
/// `permutation[j]`) and the 6m one-time-pad bits.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AliceSecret {
    pub permutation: Vec<usize>,
    pub pad_x: Vec<bool>,
    pub pad_z: Vec<bool>,
}

impl AliceSecret {
    pub fn trivial(m: usize) -> Self {
        let n = 3 * m;
        AliceSecret {
            permutation: (0..n).collect(),
            pad_x: vec![false; n],
            pad_z: vec![false; n],
        }
    }

    pub fn random<R: Rng + ?Sized>(m: usize, rng: &mut R) -> Self {
        let n = 3 * m;
        // Fisher-Yates
        let mut permutation: Vec<usize> = (0..n).collect();
        for i in (1..n).rev() {
            let j = rng.gen_range(0..=i);
            permutation.swap(i, j);
        }
        AliceSecret {
            permutation,
            pad_x: (0..n).map(|_| rng.gen()).collect(),
            pad_z: (0..n).map(|_| rng.gen()).collect(),
        }
    }

    pub fn block_qubits(&self) -> usize {
        self.permutation.len()
    }

    /// Every (permutation, pad) pair: (3m)! × 4^{3m} secrets. Exhaustive
    /// twirl enumeration; intended for m = 1.
    pub fn enumerate_all(m: usize) -> Vec<AliceSecret> {
        let n = 3 * m;
        let mut out = Vec::new();
        for perm in (0..n).permutations(n) {
            for mask in 0..(1usize << (2 * n)) {
                let pad_x = (0..n).map(|j| (mask >> j) & 1 == 1).collect();
                let pad_z = (0..n).map(|j| (mask >> (n + j)) & 1 == 1).collect();
                out.push(AliceSecret {
                    permutation: perm.clone(),
                    pad_x,
                    pad_z,
                });
            }
        }
        out
    }

    /// Slot occupied by source position `src` after permuting.
    pub fn slot_of_source(&self, src: usize) -> usize {
        self.permutation[src]
    }

    /// Inverse permutation: `inv[slot] = source`.
    pub fn inverse_permutation(&self) -> Vec<usize> {
        let mut inv = vec![0usize; self.permutation.len()];
        for (src, &dst) in self.permutation.iter().enumerate() {
            inv[dst] = src;
        }
        inv
    }

    /// FNV-1a digest of the secret, for per-trial trace records.
    pub fn digest(&self) -> u64 {
        let mut h: u64 = 0xcbf29ce484222325;
        let mut eat = |b: u8| {
            h ^= b as u64;
            h = h.wrapping_mul(0x100000001b3);
        };
        for &p in &self.permutation {
            eat(p as u8);
        }
        for j in 0..self.pad_x.len() {
            eat(u8::from(self.pad_x[j]) | (u8::from(self.pad_z[j]) << 1));
        }
        h
    }

    /// Apply the pad ⊗_j X^{x_j} Z^{z_j} (Z first, then X on each qubit)
    /// to the first 3m qubits of `state`.
    pub fn apply_pad<S: QuantumState>(&self, state: &mut S) -> Result<()> {
        let x = gates::pauli_x();
        let z = gates::pauli_z();
        for j in 0..self.block_qubits() {
            if self.pad_z[j] {
                state.apply_single_qubit_gate(j, &z)?;
            }
            if self.pad_x[j] {
                state.apply_single_qubit_gate(j, &x)?;
            }
        }
        Ok(())
    }

    /// Apply the pad inverse ⊗_j Z^{z_j} X^{x_j} (X first, then Z).
    pub fn apply_pad_inverse<S: QuantumState>(&self, state: &mut S) -> Result<()> {
        let x = gates::pauli_x();
        let z = gates::pauli_z();
        for j in 0..self.block_qubits() {
            if self.pad_x[j] {
                state.apply_single_qubit_gate(j, &x)?;
            }
            if self.pad_z[j] {
                state.apply_single_qubit_gate(j, &z)?;
            }
        }
        Ok(())
    }

    /// Apply P to a 3m-qubit state.
    pub fn apply_permutation<S: QuantumState>(&self, state: &mut S) -> Result<()> {
        state.permute_qubits(&self.permutation)
    }

    /// Apply P† to a 3m-qubit state.
    pub fn apply_permutation_inverse<S: QuantumState>(&self, state: &mut S) -> Result<()> {
        state.permute_qubits(&self.inverse_permutation())
    }

    /// Undo the whole preparation on a 3m-qubit state: pad⁻¹ then P†.
    pub fn unprepare<S: QuantumState>(&self, state: &mut S) -> Result<()> {
        self.apply_pad_inverse(state)?;
        self.apply_permutation_inverse(state)
    }
}

/// Step 1 with a caller-supplied secret:
/// |Ψ'⟩ = (⊗_j X^{x_j} Z^{z_j}) P |Ψ⟩.
pub fn alice_prepare_with(input: &InputBlock, secret: &AliceSecret) -> Result<StateVector> {
    if secret.block_qubits() != input.block_qubits() {
        return Err(Error::SizeMismatch {
            expected: input.block_qubits(),
            got: secret.block_qubits(),
        });
    }
    let mut state = input.full_state();
    secret.apply_permutation(&mut state)?;
    secret.apply_pad(&mut state)?;
    Ok(state)
}

/// Step 1 with a fresh random secret.
pub fn alice_prepare<R: Rng + ?Sized>(
    input: &InputBlock,
    rng: &mut R,
) -> Result<(StateVector, AliceSecret)> {
    let secret = AliceSecret::random(input.m(), rng);
    let state = alice_prepare_with(input, &secret)?;
    Ok((state, secret))
}
