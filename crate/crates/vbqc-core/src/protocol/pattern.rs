//! Adaptive measurement patterns for the compute branch.
//!
//! The delegated computation drives one logical wire: the data qubit is
//! teleported out of its input slot into the graph and walked along a path
//! of graph vertices by equatorial (X-Y plane) measurements, each hop
//! applying J(−φ) = H·Rz(−φ); the wire's final vertex is read out in Z.
//! Every other qubit (trap slots and off-path graph vertices) is detached
//! by a Z measurement. The client's secret enters in two ways: the data
//! slot position selects which wire is realized (wire relabeling through
//! the permutation), and the pad bits become initial byproducts that adapt
//! measurement signs and angles.
//!
//! Byproduct bookkeeping, all in the corrected frame:
//! * an equatorial step measures at φ' = (−1)^{sx}·φ + π·sz, where sx/sz
//!   fold the vertex's initial byproducts with earlier recorded outcomes;
//!   its raw outcome equals the logical one and is recorded as-is, and the
//!   teleportation pushes X^{s} to the next wire vertex and Z^{s} past it;
//! * a Z step records its pad-corrected outcome; combined with the pad's
//!   pushed-Z entry on the matched vertex this reproduces the physical
//!   Z^{raw} kick that detaching a vertex leaves on its neighbors;
//! * the Z readout flips under X-type byproducts only.

use rand::Rng;

use crate::graph::ProtocolGraph;
use crate::protocol::secret::AliceSecret;
use crate::qsim::state::CMat;
use crate::qsim::{gates, measure_qubit_z, QuantumState, StateVector};
use crate::{Error, Result};

/// Basis of one pattern step.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum MeasurementBasis {
    /// cos φ · X + sin φ · Y, the equatorial observable at base angle φ.
    XyPlane { angle: f64 },
    /// Computational-basis detachment measurement.
    ComputationalZ,
}

/// One measurement step on a global qubit, with the earlier steps whose
/// outcomes flip its sign (x) or add π / a Z kick (z).
#[derive(Clone, Debug)]
pub struct PatternStep {
    pub vertex: usize,
    pub basis: MeasurementBasis,
    pub x_deps: Vec<usize>,
    pub z_deps: Vec<usize>,
}

/// A fully wired measurement pattern: ordered steps covering every input
/// slot and every non-output graph vertex exactly once, then a Z readout
/// of the output vertex.
#[derive(Clone, Debug)]
pub struct MeasurementPattern {
    pub steps: Vec<PatternStep>,
    /// Global index of the readout qubit.
    pub output_vertex: usize,
    /// Steps whose outcomes flip the reported output bit.
    pub output_x_deps: Vec<usize>,
}

/// The logical program of the wire: the J-hop measurement angles, padded
/// with 0 when the realized wire is longer than the list.
#[derive(Clone, Debug, Default)]
pub struct WireProgram {
    pub angles: Vec<f64>,
}

impl WireProgram {
    pub fn identity() -> Self {
        WireProgram { angles: Vec::new() }
    }

    pub fn with_angles(angles: Vec<f64>) -> Self {
        WireProgram { angles }
    }

    fn angle(&self, hop: usize) -> f64 {
        self.angles.get(hop).copied().unwrap_or(0.0)
    }
}

/// How a wire program lands on the physical register for one data slot.
#[derive(Clone, Debug)]
pub struct RealizedWire {
    pub data_slot: usize,
    /// V₁ vertices from the data's entry point to the readout, inclusive.
    pub wire_path: Vec<usize>,
    /// Measurement angles, pendant first, then interior path vertices.
    pub xy_angles: Vec<f64>,
    /// V₁ index actually read out (the graph's output vertex when the
    /// data's component reaches it, otherwise the far end of its wire).
    pub readout_vertex: usize,
}

/// Initial per-qubit byproducts (bx, bz).
#[derive(Clone, Debug)]
pub struct ByproductTable {
    pub bx: Vec<bool>,
    pub bz: Vec<bool>,
}

impl ByproductTable {
    pub fn clean(n_qubits: usize) -> Self {
        ByproductTable {
            bx: vec![false; n_qubits],
            bz: vec![false; n_qubits],
        }
    }

    /// Pad bits as byproducts: slot j carries (x_j, z_j); commuting the X
    /// pad through the connecting CZ leaves an extra Z on the matched
    /// vertex.
    pub fn from_secret(graph: &ProtocolGraph, secret: &AliceSecret) -> Result<Self> {
        if secret.block_qubits() != graph.v2_count() {
            return Err(Error::SizeMismatch {
                expected: graph.v2_count(),
                got: secret.block_qubits(),
            });
        }
        let mut table = ByproductTable::clean(graph.total_qubits());
        for j in 0..graph.v2_count() {
            table.bx[graph.global_of_slot(j)] = secret.pad_x[j];
            table.bz[graph.global_of_slot(j)] = secret.pad_z[j];
            let w = graph.matched_vertex_of_slot(j)?;
            table.bz[graph.global_of_vertex(w)] ^= secret.pad_x[j];
        }
        Ok(table)
    }
}

/// Linearize the connected component of `start` in the V₁ graph, which
/// must be a simple path; returns the component in path order.
fn linearized_path_component(graph: &ProtocolGraph, start: usize) -> Result<Vec<usize>> {
    let mut in_comp = vec![false; graph.v1_count()];
    let mut queue = std::collections::VecDeque::from([start]);
    in_comp[start] = true;
    let mut comp = vec![start];
    while let Some(v) = queue.pop_front() {
        for u in graph.v1_neighbors(v) {
            if !in_comp[u] {
                in_comp[u] = true;
                comp.push(u);
                queue.push_back(u);
            }
        }
    }
    let degree = |v: usize| {
        graph
            .v1_neighbors(v)
            .into_iter()
            .filter(|u| in_comp[*u])
            .count()
    };
    if comp.iter().any(|&v| degree(v) > 2) {
        return Err(Error::PatternMismatch(
            "data component is not a simple path".into(),
        ));
    }
    let mut edge_count = 0;
    for &v in &comp {
        edge_count += degree(v);
    }
    if edge_count != 2 * (comp.len() - 1) {
        return Err(Error::PatternMismatch(
            "data component contains a cycle".into(),
        ));
    }
    if comp.len() == 1 {
        return Ok(comp);
    }
    let head = *comp
        .iter()
        .find(|&&v| degree(v) == 1)
        .expect("a path has endpoints");
    let mut ordered = vec![head];
    let mut prev = None;
    let mut cur = head;
    while ordered.len() < comp.len() {
        let next = graph
            .v1_neighbors(cur)
            .into_iter()
            .find(|&u| in_comp[u] && Some(u) != prev)
            .expect("interior path vertex has a fresh neighbor");
        ordered.push(next);
        prev = Some(cur);
        cur = next;
    }
    Ok(ordered)
}

/// Build the concrete pattern that walks the data from `data_slot` to the
/// readout vertex, detaching everything else.
pub fn realize_wire_pattern(
    graph: &ProtocolGraph,
    data_slot: usize,
    program: &WireProgram,
) -> Result<(MeasurementPattern, RealizedWire)> {
    if data_slot >= graph.v2_count() {
        return Err(Error::QubitIndex {
            index: data_slot,
            n_qubits: graph.v2_count(),
        });
    }
    let entry = graph.matched_vertex_of_slot(data_slot)?;
    let ordered = linearized_path_component(graph, entry)?;
    let pos_of = |v: usize| ordered.iter().position(|&u| u == v);
    let entry_pos = pos_of(entry).expect("entry is in its own component");
    let out_pos = match pos_of(graph.output_vertex()) {
        Some(p) => p,
        None => {
            // far endpoint of the data's own wire
            if ordered.len() - 1 - entry_pos >= entry_pos {
                ordered.len() - 1
            } else {
                0
            }
        }
    };
    let wire_path: Vec<usize> = if entry_pos <= out_pos {
        ordered[entry_pos..=out_pos].to_vec()
    } else {
        ordered[out_pos..=entry_pos].iter().rev().copied().collect()
    };
    let readout_vertex = *wire_path.last().expect("nonempty path");

    let mut on_wire = vec![false; graph.v1_count()];
    for &v in &wire_path {
        on_wire[v] = true;
    }

    let mut steps: Vec<PatternStep> = Vec::new();
    // Detachment Z steps: trap slots, then off-wire graph vertices.
    for j in 0..graph.v2_count() {
        if j != data_slot {
            steps.push(PatternStep {
                vertex: graph.global_of_slot(j),
                basis: MeasurementBasis::ComputationalZ,
                x_deps: Vec::new(),
                z_deps: Vec::new(),
            });
        }
    }
    for (v, &wired) in on_wire.iter().enumerate() {
        if !wired {
            steps.push(PatternStep {
                vertex: graph.global_of_vertex(v),
                basis: MeasurementBasis::ComputationalZ,
                x_deps: Vec::new(),
                z_deps: Vec::new(),
            });
        }
    }
    let z_step_of_vertex: std::collections::HashMap<usize, usize> = steps
        .iter()
        .enumerate()
        .map(|(i, s)| (s.vertex, i))
        .collect();
    let z_neighbors = |global: usize, graph: &ProtocolGraph| -> Vec<usize> {
        let mut deps = Vec::new();
        // neighbors of a slot: its matched vertex; of a vertex: V₁
        // neighbors plus its matched slot
        if global < graph.v2_count() {
            let w = graph.matched_vertex_of_slot(global).expect("validated");
            if let Some(&s) = z_step_of_vertex.get(&graph.global_of_vertex(w)) {
                deps.push(s);
            }
        } else {
            let v = global - graph.v2_count();
            for u in graph.v1_neighbors(v) {
                if let Some(&s) = z_step_of_vertex.get(&graph.global_of_vertex(u)) {
                    deps.push(s);
                }
            }
            if let Some(j) = graph.matched_slot_of_vertex(v) {
                if let Some(&s) = z_step_of_vertex.get(&graph.global_of_slot(j)) {
                    deps.push(s);
                }
            }
        }
        deps
    };

    // Wire XY steps: the data pendant, then path vertices up to (not
    // including) the readout.
    let mut xy_vertices = vec![graph.global_of_slot(data_slot)];
    for &v in wire_path.iter().take(wire_path.len() - 1) {
        xy_vertices.push(graph.global_of_vertex(v));
    }
    let mut xy_angles = Vec::with_capacity(xy_vertices.len());
    let mut xy_step_indices = Vec::with_capacity(xy_vertices.len());
    for (hop, &vertex) in xy_vertices.iter().enumerate() {
        let angle = program.angle(hop);
        xy_angles.push(angle);
        let mut x_deps = Vec::new();
        let mut z_deps = z_neighbors(vertex, graph);
        if hop >= 1 {
            x_deps.push(xy_step_indices[hop - 1]);
        }
        if hop >= 2 {
            z_deps.push(xy_step_indices[hop - 2]);
        }
        xy_step_indices.push(steps.len());
        steps.push(PatternStep {
            vertex,
            basis: MeasurementBasis::XyPlane { angle },
            x_deps,
            z_deps,
        });
    }

    let pattern = MeasurementPattern {
        steps,
        output_vertex: graph.global_of_vertex(readout_vertex),
        output_x_deps: vec![*xy_step_indices.last().expect("at least the pendant")],
    };
    debug_assert_eq!(
        pattern.steps.len() + 1,
        graph.total_qubits(),
        "pattern must cover every qubit exactly once"
    );
    let realized = RealizedWire {
        data_slot,
        wire_path,
        xy_angles,
        readout_vertex,
    };
    Ok((pattern, realized))
}

/// Run a pattern on a state, sampling each measurement. Returns the
/// byproduct-corrected output bit (`true` = accept).
pub fn execute_pattern<S: QuantumState, R: Rng + ?Sized>(
    state: &mut S,
    pattern: &MeasurementPattern,
    byproducts: &ByproductTable,
    rng: &mut R,
) -> Result<bool> {
    if byproducts.bx.len() != state.n_qubits() {
        return Err(Error::SizeMismatch {
            expected: state.n_qubits(),
            got: byproducts.bx.len(),
        });
    }
    let mut outcomes: Vec<bool> = Vec::with_capacity(pattern.steps.len());
    let fold = |deps: &[usize], outcomes: &[bool]| -> Result<bool> {
        let mut acc = false;
        for &d in deps {
            if d >= outcomes.len() {
                return Err(Error::PatternMismatch(format!(
                    "dependency {d} references a later step"
                )));
            }
            acc ^= outcomes[d];
        }
        Ok(acc)
    };
    for step in &pattern.steps {
        if step.vertex >= state.n_qubits() {
            return Err(Error::QubitIndex {
                index: step.vertex,
                n_qubits: state.n_qubits(),
            });
        }
        let sx = byproducts.bx[step.vertex] ^ fold(&step.x_deps, &outcomes)?;
        let sz = byproducts.bz[step.vertex] ^ fold(&step.z_deps, &outcomes)?;
        match step.basis {
            MeasurementBasis::XyPlane { angle } => {
                let adapted = if sx { -angle } else { angle }
                    + if sz { std::f64::consts::PI } else { 0.0 };
                let rotate = gates::xy_eigenbasis(adapted).adjoint();
                state.apply_single_qubit_gate(step.vertex, &rotate)?;
                let raw = measure_qubit_z(state, step.vertex, rng)?;
                outcomes.push(raw);
            }
            MeasurementBasis::ComputationalZ => {
                let raw = measure_qubit_z(state, step.vertex, rng)?;
                outcomes.push(raw ^ sx);
            }
        }
    }
    let raw = measure_qubit_z(state, pattern.output_vertex, rng)?;
    let corrected =
        raw ^ byproducts.bx[pattern.output_vertex] ^ fold(&pattern.output_x_deps, &outcomes)?;
    Ok(corrected)
}

/// The 2x2 circuit a realized wire implements: the ordered product of
/// J(−φ) = H·Rz(−φ) over its equatorial measurements.
pub fn realized_circuit_unitary(realized: &RealizedWire) -> CMat {
    let mut u = CMat::identity(2, 2);
    for &phi in &realized.xy_angles {
        u = gates::hadamard() * gates::rz(-phi) * u;
    }
    u
}

/// Exact compute-branch acceptance for a single-qubit data state: the
/// data slot is uniform under the random permutation, each slot's wire
/// applies its realized circuit, and acceptance reads bit 1.
pub fn exact_compute_acceptance(
    graph: &ProtocolGraph,
    program: &WireProgram,
    data_state: &StateVector,
) -> Result<f64> {
    if data_state.n_qubits() != 1 {
        return Err(Error::SizeMismatch {
            expected: 1,
            got: data_state.n_qubits(),
        });
    }
    let mut acc = 0.0;
    for slot in 0..graph.v2_count() {
        let (_, realized) = realize_wire_pattern(graph, slot, program)?;
        let u = realized_circuit_unitary(&realized);
        let out = u[(1, 0)] * data_state.amplitudes()[0] + u[(1, 1)] * data_state.amplitudes()[1];
        acc += out.norm_sqr();
    }
    Ok(acc / graph.v2_count() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn comb_realization_wires_through_the_chain() {
        let graph = ProtocolGraph::chain(3, 1).unwrap();
        // data on slot 2 couples at chain vertex 2; wire walks to output 0
        let (pattern, realized) =
            realize_wire_pattern(&graph, 2, &WireProgram::identity()).unwrap();
        assert_eq!(realized.wire_path, vec![2, 1, 0]);
        assert_eq!(realized.readout_vertex, 0);
        assert_eq!(realized.xy_angles.len(), 3);
        assert_eq!(pattern.steps.len(), 5); // 2 trap slots + 3 XY steps
        assert_eq!(pattern.output_vertex, graph.global_of_vertex(0));
    }

    #[test]
    fn disjoint_wires_realize_uniformly() {
        let graph = ProtocolGraph::disjoint_wires(1, 2).unwrap();
        for slot in 0..3 {
            let (_, realized) =
                realize_wire_pattern(&graph, slot, &WireProgram::identity()).unwrap();
            assert_eq!(realized.xy_angles.len(), 2, "two hops for every slot");
            let u = realized_circuit_unitary(&realized);
            // angles 0 give H·H = I
            assert!((u - CMat::identity(2, 2)).camax() < 1e-12);
        }
    }

    #[test]
    fn cyclic_component_rejected() {
        let triangle = ProtocolGraph::new(
            3,
            3,
            vec![(0, 1), (1, 2), (0, 2)],
            vec![(0, 0), (1, 1), (2, 2)],
            0,
        )
        .unwrap();
        assert!(matches!(
            realize_wire_pattern(&triangle, 0, &WireProgram::identity()),
            Err(Error::PatternMismatch(_))
        ));
    }

    #[test]
    fn execute_covers_every_qubit() {
        let graph = ProtocolGraph::chain(3, 1).unwrap();
        let (pattern, _) = realize_wire_pattern(&graph, 1, &WireProgram::identity()).unwrap();
        let mut seen = std::collections::HashSet::new();
        for s in &pattern.steps {
            assert!(seen.insert(s.vertex));
        }
        assert!(seen.insert(pattern.output_vertex));
        assert_eq!(seen.len(), graph.total_qubits());
        // dependencies point backwards
        for (i, s) in pattern.steps.iter().enumerate() {
            for &d in s.x_deps.iter().chain(&s.z_deps) {
                assert!(d < i);
            }
        }
    }
}
