//! Protocol resource layout: the computation graph on the server register
//! V₁, the client input block V₂, and the matching that couples them.
//!
//! Global qubit indexing of a coupled state: the 3m input-block qubits come
//! first (slot j is qubit j), then the N graph vertices (vertex v is qubit
//! 3m + v), mirroring the |Ψ'⟩ ⊗ |G⟩ tensor order.

use rand::Rng;

use crate::qsim::{DensityOperator, Pauli, PauliString, QuantumState, StateVector};
use crate::{Error, Result};

/// Graph G on V₁ plus the input block V₂ and the connecting matching.
#[derive(Clone, Debug)]
pub struct ProtocolGraph {
    v1_count: usize,
    v2_count: usize,
    edges_g: Vec<(usize, usize)>,
    e_connect: Vec<(usize, usize)>, // (V₁ vertex, V₂ slot)
    output_vertex: usize,
}

impl ProtocolGraph {
    /// Validating constructor. `e_connect` must be a perfect matching on
    /// V₂: every slot appears exactly once and matched vertices are
    /// distinct. `v2_count` must be divisible by 3.
    pub fn new(
        v1_count: usize,
        v2_count: usize,
        edges_g: Vec<(usize, usize)>,
        e_connect: Vec<(usize, usize)>,
        output_vertex: usize,
    ) -> Result<Self> {
        if v1_count == 0 {
            return Err(Error::BadGraph("graph needs at least one vertex".into()));
        }
        if !v2_count.is_multiple_of(3) {
            return Err(Error::BadGraph(format!(
                "input block size {v2_count} is not divisible by 3"
            )));
        }
        if output_vertex >= v1_count {
            return Err(Error::BadGraph(format!(
                "output vertex {output_vertex} out of range"
            )));
        }
        let mut seen_edges = std::collections::HashSet::new();
        for &(a, b) in &edges_g {
            if a >= v1_count || b >= v1_count {
                return Err(Error::BadGraph(format!("edge ({a},{b}) out of range")));
            }
            if a == b {
                return Err(Error::BadGraph(format!("self-loop at vertex {a}")));
            }
            if !seen_edges.insert((a.min(b), a.max(b))) {
                return Err(Error::BadGraph(format!("duplicate edge ({a},{b})")));
            }
        }
        let mut slot_seen = vec![false; v2_count];
        let mut vertex_seen = vec![false; v1_count];
        for &(v, j) in &e_connect {
            if v >= v1_count {
                return Err(Error::BadGraph(format!("connect vertex {v} out of range")));
            }
            if j >= v2_count {
                return Err(Error::BadGraph(format!("connect slot {j} out of range")));
            }
            if slot_seen[j] {
                return Err(Error::BadGraph(format!(
                    "slot {j} appears in more than one connecting edge"
                )));
            }
            if vertex_seen[v] {
                return Err(Error::BadGraph(format!(
                    "vertex {v} matched to more than one input slot"
                )));
            }
            slot_seen[j] = true;
            vertex_seen[v] = true;
        }
        if slot_seen.iter().any(|s| !s) {
            return Err(Error::BadGraph(
                "connecting edges are not a perfect matching on the input block".into(),
            ));
        }
        Ok(ProtocolGraph {
            v1_count,
            v2_count,
            edges_g,
            e_connect,
            output_vertex,
        })
    }

    /// A length-N chain on V₁ whose last 3m vertices each carry one input
    /// slot (slot j on chain vertex N − 3m + j); output at the chain head.
    pub fn chain(v1_count: usize, m: usize) -> Result<Self> {
        let v2 = 3 * m;
        if v1_count < v2 {
            return Err(Error::BadGraph(format!(
                "chain of length {v1_count} cannot host {v2} input slots"
            )));
        }
        let edges = (0..v1_count.saturating_sub(1)).map(|v| (v, v + 1)).collect();
        let matching = (0..v2).map(|j| (v1_count - v2 + j, j)).collect();
        ProtocolGraph::new(v1_count, v2, edges, matching, 0)
    }

    /// 3m disjoint wires of `wire_len` graph vertices each; slot ℓ is
    /// matched to the head of wire ℓ and the output sits at the tail of
    /// wire 0. Permuting input slots permutes structurally identical
    /// wires, so computation statistics do not depend on the permutation.
    pub fn disjoint_wires(m: usize, wire_len: usize) -> Result<Self> {
        if wire_len == 0 {
            return Err(Error::BadGraph("wires need at least one vertex".into()));
        }
        let v2 = 3 * m;
        let v1 = v2 * wire_len;
        let mut edges = Vec::new();
        for w in 0..v2 {
            for i in 0..wire_len - 1 {
                edges.push((w * wire_len + i, w * wire_len + i + 1));
            }
        }
        let matching = (0..v2).map(|j| (j * wire_len, j)).collect();
        ProtocolGraph::new(v1, v2, edges, matching, wire_len - 1)
    }

    pub fn v1_count(&self) -> usize {
        self.v1_count
    }

    pub fn v2_count(&self) -> usize {
        self.v2_count
    }

    /// m, with v2_count = 3m.
    pub fn input_qubits(&self) -> usize {
        self.v2_count / 3
    }

    pub fn total_qubits(&self) -> usize {
        self.v1_count + self.v2_count
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges_g
    }

    pub fn connecting_edges(&self) -> &[(usize, usize)] {
        &self.e_connect
    }

    pub fn output_vertex(&self) -> usize {
        self.output_vertex
    }

    /// Global qubit index of a V₁ vertex in the coupled register.
    pub fn global_of_vertex(&self, v: usize) -> usize {
        self.v2_count + v
    }

    /// Global qubit index of a V₂ slot (identity, slots come first).
    pub fn global_of_slot(&self, j: usize) -> usize {
        j
    }

    /// The unique V₁ vertex matched to slot `j`.
    pub fn matched_vertex_of_slot(&self, j: usize) -> Result<usize> {
        self.e_connect
            .iter()
            .find(|&&(_, s)| s == j)
            .map(|&(v, _)| v)
            .ok_or_else(|| Error::BadGraph(format!("slot {j} has no connecting edge")))
    }

    /// The slot matched to a V₁ vertex, if any.
    pub fn matched_slot_of_vertex(&self, v: usize) -> Option<usize> {
        self.e_connect
            .iter()
            .find(|&&(u, _)| u == v)
            .map(|&(_, s)| s)
    }

    /// Neighbors of `v` within V₁.
    pub fn v1_neighbors(&self, v: usize) -> Vec<usize> {
        let mut out = Vec::new();
        for &(a, b) in &self.edges_g {
            if a == v {
                out.push(b);
            } else if b == v {
                out.push(a);
            }
        }
        out.sort_unstable();
        out
    }

    /// |G⟩: |+⟩ on every V₁ vertex, CZ on every graph edge.
    pub fn build_graph_state(&self) -> StateVector {
        let mut state = StateVector::plus_state(self.v1_count);
        for &(a, b) in &self.edges_g {
            state.apply_cz(a, b).expect("validated edges");
        }
        state
    }

    /// Couple an input-block state to the graph state:
    /// (⊗_{e∈E_connect} CZ_e)(input ⊗ |G⟩⟨G|).
    pub fn attach_input(&self, input: &DensityOperator) -> Result<DensityOperator> {
        if input.n_qubits() != self.v2_count {
            return Err(Error::SizeMismatch {
                expected: self.v2_count,
                got: input.n_qubits(),
            });
        }
        let mut coupled = input.kron(&self.build_graph_state().density());
        for &(v, j) in &self.e_connect {
            coupled.apply_cz(self.global_of_slot(j), self.global_of_vertex(v))?;
        }
        Ok(coupled)
    }

    /// Pure-state variant of [`Self::attach_input`].
    pub fn attach_input_pure(&self, input: &StateVector) -> Result<StateVector> {
        if input.n_qubits() != self.v2_count {
            return Err(Error::SizeMismatch {
                expected: self.v2_count,
                got: input.n_qubits(),
            });
        }
        let mut coupled = input.kron(&self.build_graph_state());
        for &(v, j) in &self.e_connect {
            coupled.apply_cz(self.global_of_slot(j), self.global_of_vertex(v))?;
        }
        Ok(coupled)
    }

    /// The N tested stabilizer generators of the coupled state, one per V₁
    /// vertex v:
    ///     g_v = X_v · ∏_{u ∈ N₁(v)} Z_u · ∏_{j matched to v} Z_j
    /// with Z-tails extending into V₂ along connecting edges. Every g_v
    /// stabilizes `attach_input(σ)` for arbitrary σ.
    pub fn coupled_stabilizer_generators(&self) -> Result<StabilizerGeneratorSet> {
        let n = self.total_qubits();
        let mut gens = Vec::with_capacity(self.v1_count);
        for v in 0..self.v1_count {
            let mut support = vec![(self.global_of_vertex(v), Pauli::X)];
            for u in self.v1_neighbors(v) {
                support.push((self.global_of_vertex(u), Pauli::Z));
            }
            if let Some(j) = self.matched_slot_of_vertex(v) {
                support.push((self.global_of_slot(j), Pauli::Z));
            }
            gens.push(PauliString::from_support(n, support)?);
        }
        StabilizerGeneratorSet::new(gens)
    }
}

/// An independent, pairwise-commuting set of stabilizer generators.
#[derive(Clone, Debug)]
pub struct StabilizerGeneratorSet {
    generators: Vec<PauliString>,
}

impl StabilizerGeneratorSet {
    /// Validates pairwise commutation (symplectic check) and GF(2)
    /// independence: no nonempty subset may multiply to ± identity.
    pub fn new(generators: Vec<PauliString>) -> Result<Self> {
        if generators.is_empty() {
            return Err(Error::BadParameter("empty generator set".into()));
        }
        let n = generators[0].n_qubits();
        for g in &generators {
            if g.n_qubits() != n {
                return Err(Error::SizeMismatch {
                    expected: n,
                    got: g.n_qubits(),
                });
            }
        }
        for i in 0..generators.len() {
            for j in (i + 1)..generators.len() {
                if !generators[i].commutes_with(&generators[j])? {
                    return Err(Error::NonCommuting(i, j));
                }
            }
        }
        if gf2_rank(&generators) != generators.len() {
            return Err(Error::DependentGenerators);
        }
        Ok(StabilizerGeneratorSet { generators })
    }

    pub fn n_generators(&self) -> usize {
        self.generators.len()
    }

    pub fn n_qubits(&self) -> usize {
        self.generators[0].n_qubits()
    }

    pub fn generators(&self) -> &[PauliString] {
        &self.generators
    }

    /// ∏_j g_j^{k_j} with its true accumulated ±1 sign.
    pub fn subset_product(&self, subset: &[bool]) -> Result<PauliString> {
        if subset.len() != self.generators.len() {
            return Err(Error::SizeMismatch {
                expected: self.generators.len(),
                got: subset.len(),
            });
        }
        let mut acc = PauliString::identity(self.n_qubits());
        for (g, &take) in self.generators.iter().zip(subset) {
            if take {
                acc = acc.product(g)?;
            }
        }
        Ok(acc)
    }

    /// Rejection-sample an independent commuting set of `count` positive
    /// generators on `n_qubits` qubits.
    pub fn random<R: Rng + ?Sized>(n_qubits: usize, count: usize, rng: &mut R) -> Self {
        assert!(count <= n_qubits, "at most n independent commuting strings");
        loop {
            let mut gens: Vec<PauliString> = Vec::with_capacity(count);
            'outer: while gens.len() < count {
                let letters: Vec<Pauli> = (0..n_qubits)
                    .map(|_| Pauli::ALL[rng.gen_range(0..4)])
                    .collect();
                let cand = PauliString::new(letters, crate::qsim::Sign::Plus);
                if cand.is_identity() {
                    continue 'outer;
                }
                for g in &gens {
                    if !g.commutes_with(&cand).expect("same size") {
                        continue 'outer;
                    }
                }
                let mut trial = gens.clone();
                trial.push(cand);
                if gf2_rank(&trial) == trial.len() {
                    gens = trial;
                }
            }
            if let Ok(set) = StabilizerGeneratorSet::new(gens) {
                return set;
            }
        }
    }
}

/// Rank over GF(2) of the symplectic (x|z) representation.
fn gf2_rank(strings: &[PauliString]) -> usize {
    let n = strings[0].n_qubits();
    let mut rows: Vec<u128> = strings
        .iter()
        .map(|s| {
            let (x, z) = s.symplectic_bits();
            let mut row = 0u128;
            for q in 0..n {
                if x[q] {
                    row |= 1 << q;
                }
                if z[q] {
                    row |= 1 << (n + q);
                }
            }
            row
        })
        .collect();
    let mut rank = 0;
    for bit in 0..(2 * n) {
        let mask = 1u128 << bit;
        if let Some(pivot) = (rank..rows.len()).find(|&r| rows[r] & mask != 0) {
            rows.swap(rank, pivot);
            for r in 0..rows.len() {
                if r != rank && rows[r] & mask != 0 {
                    rows[r] ^= rows[rank];
                }
            }
            rank += 1;
        }
    }
    rank
}
