//! Experiment configuration: a single self-describing TOML file, with a
//! few command-line overrides layered on top.

use std::path::Path;

use num_complex::Complex64;
use serde::Deserialize;
use vbqc_core::graph::ProtocolGraph;
use vbqc_core::protocol::{BobStrategy, DecisionInstance, InputBlock, WireProgram};
use vbqc_core::qsim::{CMat, DensityOperator, PauliString, StateVector};

use crate::CliError;

/// Hard ceiling: configurations beyond this are refused before any state
/// is allocated.
pub const MAX_TOTAL_QUBITS: usize = 12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Sample,
    Exact,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphSection {
    #[serde(default)]
    pub preset: Option<String>, // "chain" | "wires"
    #[serde(default)]
    pub v1_count: Option<usize>,
    #[serde(default)]
    pub wire_len: Option<usize>,
    #[serde(default)]
    pub edges: Option<Vec<[usize; 2]>>,
    #[serde(default)]
    pub matching: Option<Vec<[usize; 2]>>, // (vertex, slot)
    #[serde(default)]
    pub output_vertex: Option<usize>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InputSection {
    #[serde(default)]
    pub preset: Option<String>, // "zero" | "one" | "plus"
    #[serde(default)]
    pub amplitudes: Option<Vec<[f64; 2]>>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PatternSection {
    #[serde(default)]
    pub angles: Vec<f64>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StrategySection {
    pub name: String,
    #[serde(default)]
    pub pauli: Option<String>,
    #[serde(default)]
    pub p: Option<f64>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default)]
    pub format: Option<OutputFormat>,
    #[serde(default)]
    pub path: Option<String>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub experiment_id: Option<String>,
    pub m: usize,
    pub q: f64,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub mode: Option<Mode>,
    #[serde(default = "default_r")]
    pub r: u32,
    /// Reporting ε for the bound table. Derived from the measured pass
    /// rates when absent.
    #[serde(default)]
    pub epsilon: Option<f64>,
    pub graph: GraphSection,
    pub input: InputSection,
    #[serde(default)]
    pub pattern: Option<PatternSection>,
    pub strategy: StrategySection,
    #[serde(default)]
    pub output: Option<OutputSection>,
}

fn default_trials() -> usize {
    1000
}

fn default_r() -> u32 {
    10
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::config(format!("cannot read {}: {e}", path.display())))?;
        let cfg: ExperimentConfig = toml::from_str(&text)
            .map_err(|e| CliError::config(format!("parse error in {}: {e}", path.display())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// The built-in default: honest server on the 3-chain with one data
    /// qubit in |1⟩ and the identity wire program.
    pub fn default_experiment() -> Self {
        ExperimentConfig {
            experiment_id: Some("default-honest-chain".into()),
            m: 1,
            q: 0.5,
            trials: 1000,
            seed: 1,
            mode: Some(Mode::Sample),
            r: 10,
            epsilon: None,
            graph: GraphSection {
                preset: Some("chain".into()),
                v1_count: Some(3),
                wire_len: None,
                edges: None,
                matching: None,
                output_vertex: None,
            },
            input: InputSection {
                preset: Some("one".into()),
                amplitudes: None,
            },
            pattern: Some(PatternSection { angles: vec![] }),
            strategy: StrategySection {
                name: "honest".into(),
                pauli: None,
                p: None,
            },
            output: None,
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.m == 0 {
            return Err(CliError::config("m must be ≥ 1"));
        }
        if !(0.0..=1.0).contains(&self.q) {
            return Err(CliError::config(format!("q = {} outside [0, 1]", self.q)));
        }
        if self.trials == 0 {
            return Err(CliError::config("trials must be ≥ 1"));
        }
        if let Some(eps) = self.epsilon {
            if !(0.0..1.0).contains(&eps) {
                return Err(CliError::config(format!("epsilon = {eps} outside [0, 1)")));
            }
        }
        // refuse infeasible sizes before building any state
        let v1 = self.v1_count_hint()?;
        let total = v1 + 3 * self.m;
        if total > MAX_TOTAL_QUBITS {
            return Err(CliError::config(format!(
                "{total} total qubits exceed the {MAX_TOTAL_QUBITS}-qubit ceiling"
            )));
        }
        Ok(())
    }

    fn v1_count_hint(&self) -> Result<usize, CliError> {
        let g = &self.graph;
        match g.preset.as_deref() {
            Some("chain") => g
                .v1_count
                .ok_or_else(|| CliError::config("graph.preset = \"chain\" needs v1_count")),
            Some("wires") => {
                let len = g.wire_len.unwrap_or(2);
                Ok(3 * self.m * len)
            }
            Some(other) => Err(CliError::config(format!("unknown graph preset {other:?}"))),
            None => g
                .v1_count
                .ok_or_else(|| CliError::config("explicit graphs need v1_count")),
        }
    }

    pub fn experiment_id(&self) -> String {
        self.experiment_id
            .clone()
            .unwrap_or_else(|| format!("{}-{}", self.strategy.name, self.m))
    }

    pub fn build_graph(&self) -> Result<ProtocolGraph, CliError> {
        let g = &self.graph;
        let graph = match g.preset.as_deref() {
            Some("chain") => ProtocolGraph::chain(
                g.v1_count
                    .ok_or_else(|| CliError::config("graph.preset = \"chain\" needs v1_count"))?,
                self.m,
            ),
            Some("wires") => ProtocolGraph::disjoint_wires(self.m, g.wire_len.unwrap_or(2)),
            Some(other) => {
                return Err(CliError::config(format!("unknown graph preset {other:?}")))
            }
            None => {
                let v1 = g
                    .v1_count
                    .ok_or_else(|| CliError::config("explicit graphs need v1_count"))?;
                let edges = g
                    .edges
                    .clone()
                    .unwrap_or_default()
                    .into_iter()
                    .map(|[a, b]| (a, b))
                    .collect();
                let matching = g
                    .matching
                    .clone()
                    .ok_or_else(|| CliError::config("explicit graphs need a matching"))?
                    .into_iter()
                    .map(|[v, s]| (v, s))
                    .collect();
                ProtocolGraph::new(v1, 3 * self.m, edges, matching, g.output_vertex.unwrap_or(0))
            }
        }
        .map_err(|e| CliError::config(format!("invalid graph: {e}")))?;
        Ok(graph)
    }

    pub fn build_input(&self) -> Result<InputBlock, CliError> {
        let psi = match (&self.input.preset, &self.input.amplitudes) {
            (_, Some(raw)) => {
                let amps: Vec<Complex64> =
                    raw.iter().map(|[re, im]| Complex64::new(*re, *im)).collect();
                // normalize after parsing
                let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
                if norm < 1e-12 {
                    return Err(CliError::config("input amplitudes are all zero"));
                }
                StateVector::from_amplitudes(amps.into_iter().map(|a| a / norm).collect())
                    .map_err(|e| CliError::config(format!("invalid input state: {e}")))?
            }
            (Some(preset), None) => match preset.as_str() {
                "zero" => StateVector::zero_state(self.m),
                "one" => StateVector::basis_state(self.m, (1 << self.m) - 1)
                    .expect("all-ones index in range"),
                "plus" => StateVector::plus_state(self.m),
                other => {
                    return Err(CliError::config(format!("unknown input preset {other:?}")))
                }
            },
            (None, None) => {
                return Err(CliError::config("input needs a preset or amplitudes"))
            }
        };
        if psi.n_qubits() != self.m {
            return Err(CliError::config(format!(
                "input has {} qubits but m = {}",
                psi.n_qubits(),
                self.m
            )));
        }
        InputBlock::new(psi).map_err(|e| CliError::config(format!("invalid input: {e}")))
    }

    pub fn build_instance(&self) -> Result<DecisionInstance, CliError> {
        let angles = self
            .pattern
            .as_ref()
            .map(|p| p.angles.clone())
            .unwrap_or_default();
        DecisionInstance::amplified(self.r, WireProgram::with_angles(angles))
            .map_err(|e| CliError::config(format!("invalid instance: {e}")))
    }

    pub fn build_strategy(&self, graph: &ProtocolGraph) -> Result<BobStrategy, CliError> {
        let block = 3 * self.m;
        let dim = 1usize << block;
        let strategy = match self.strategy.name.as_str() {
            "honest" => BobStrategy::Honest,
            "replace_zero" => {
                BobStrategy::ReplaceInput(StateVector::zero_state(block).density())
            }
            "replace_mixed" => {
                BobStrategy::ReplaceInput(DensityOperator::maximally_mixed(block))
            }
            "pauli" => {
                let letters = self.strategy.pauli.as_deref().ok_or_else(|| {
                    CliError::config("strategy \"pauli\" needs pauli = \"<letters>\"")
                })?;
                let parsed = parse_pauli(letters, block)?;
                BobStrategy::ChannelOnInput(vec![parsed.matrix()])
            }
            "depolarize" => {
                let p = self.strategy.p.ok_or_else(|| {
                    CliError::config("strategy \"depolarize\" needs p = <rate>")
                })?;
                if !(0.0..=1.0).contains(&p) {
                    return Err(CliError::config(format!("depolarize rate {p} outside [0,1]")));
                }
                let mut kraus: Vec<CMat> =
                    vec![CMat::identity(dim, dim) * Complex64::new((1.0 - p).sqrt(), 0.0)];
                let scale = p.sqrt() / dim as f64;
                for idx in 0..(1usize << (2 * block)) {
                    let sigma = PauliString::from_lex_index(block, idx)
                        .expect("index in range")
                        .matrix();
                    kraus.push(sigma * Complex64::new(scale, 0.0));
                }
                BobStrategy::ChannelOnInput(kraus)
            }
            "wrong_graph_swap" => {
                let mut matching = graph.connecting_edges().to_vec();
                if matching.len() < 2 {
                    return Err(CliError::config("matching too small to swap"));
                }
                let (v0, s0) = matching[0];
                let (v1, s1) = matching[1];
                matching[0] = (v0, s1);
                matching[1] = (v1, s0);
                let alt = ProtocolGraph::new(
                    graph.v1_count(),
                    graph.v2_count(),
                    graph.edges().to_vec(),
                    matching,
                    graph.output_vertex(),
                )
                .map_err(|e| CliError::config(format!("cannot build wrong graph: {e}")))?;
                BobStrategy::WrongGraph(alt)
            }
            "wrong_graph_edges" => {
                let mut edges = graph.edges().to_vec();
                if edges.pop().is_none() {
                    return Err(CliError::config("graph has no edge to drop"));
                }
                let alt = ProtocolGraph::new(
                    graph.v1_count(),
                    graph.v2_count(),
                    edges,
                    graph.connecting_edges().to_vec(),
                    graph.output_vertex(),
                )
                .map_err(|e| CliError::config(format!("cannot build wrong graph: {e}")))?;
                BobStrategy::WrongGraph(alt)
            }
            "mixed_state" => {
                BobStrategy::ArbitraryState(DensityOperator::maximally_mixed(graph.total_qubits()))
            }
            other => return Err(CliError::config(format!("unknown strategy {other:?}"))),
        };
        strategy
            .validate(graph)
            .map_err(|e| CliError::config(format!("strategy does not fit the graph: {e}")))?;
        Ok(strategy)
    }
}

fn parse_pauli(letters: &str, n: usize) -> Result<PauliString, CliError> {
    if letters.len() != n {
        return Err(CliError::config(format!(
            "pauli string {letters:?} must have length {n}"
        )));
    }
    let support: Result<Vec<_>, CliError> = letters
        .chars()
        .enumerate()
        .map(|(i, c)| {
            let p = match c {
                'I' | 'i' => vbqc_core::qsim::Pauli::I,
                'X' | 'x' => vbqc_core::qsim::Pauli::X,
                'Y' | 'y' => vbqc_core::qsim::Pauli::Y,
                'Z' | 'z' => vbqc_core::qsim::Pauli::Z,
                other => {
                    return Err(CliError::config(format!("unknown Pauli letter {other:?}")))
                }
            };
            Ok((i, p))
        })
        .collect();
    PauliString::from_support(n, support?)
        .map_err(|e| CliError::config(format!("invalid pauli string: {e}")))
}
