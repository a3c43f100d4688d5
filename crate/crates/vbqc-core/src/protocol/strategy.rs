//! Step-2 server behavior: honest coupling or one of several deviations.

use crate::graph::ProtocolGraph;
use crate::qsim::state::CMat;
use crate::qsim::{DensityOperator, StateVector, TOL_EIGEN};
use crate::{Error, Result};

/// What the server does with the padded input it received.
#[derive(Clone, Debug)]
pub enum BobStrategy {
    /// Couple the received block to the agreed graph state.
    Honest,
    /// Discard the received block and couple a substitute instead.
    ReplaceInput(DensityOperator),
    /// Apply a CPTP map (full 2^{3m}-dimensional Kraus operators) to the
    /// received block, then couple honestly.
    ChannelOnInput(Vec<CMat>),
    /// Couple the received block via a different graph of the same shape.
    WrongGraph(ProtocolGraph),
    /// Send a fixed (3m+N)-qubit state, ignoring the input entirely.
    ArbitraryState(DensityOperator),
}

impl BobStrategy {
    /// Check the strategy's parameters against the protocol graph.
    pub fn validate(&self, graph: &ProtocolGraph) -> Result<()> {
        match self {
            BobStrategy::Honest => Ok(()),
            BobStrategy::ReplaceInput(sub) => {
                if sub.n_qubits() != graph.v2_count() {
                    return Err(Error::SizeMismatch {
                        expected: graph.v2_count(),
                        got: sub.n_qubits(),
                    });
                }
                Ok(())
            }
            BobStrategy::ChannelOnInput(kraus) => {
                let dim = 1usize << graph.v2_count();
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
                if dev > TOL_EIGEN {
                    return Err(Error::BadKraus { deviation: dev });
                }
                Ok(())
            }
            BobStrategy::WrongGraph(alt) => {
                if alt.v2_count() != graph.v2_count() || alt.v1_count() != graph.v1_count() {
                    return Err(Error::BadGraph(
                        "alternative graph must keep the register shape".into(),
                    ));
                }
                Ok(())
            }
            BobStrategy::ArbitraryState(rho) => {
                if rho.n_qubits() != graph.total_qubits() {
                    return Err(Error::SizeMismatch {
                        expected: graph.total_qubits(),
                        got: rho.n_qubits(),
                    });
                }
                Ok(())
            }
        }
    }

    /// Whether the response to a pure padded input stays pure (so trials
    /// can run on state vectors).
    pub fn has_pure_response(&self) -> bool {
        matches!(self, BobStrategy::Honest | BobStrategy::WrongGraph(_))
    }
}

/// The (3m+N)-qubit state the server hands back.
pub fn bob_respond(
    strategy: &BobStrategy,
    padded_input: &DensityOperator,
    graph: &ProtocolGraph,
) -> Result<DensityOperator> {
    strategy.validate(graph)?;
    if padded_input.n_qubits() != graph.v2_count() {
        return Err(Error::SizeMismatch {
            expected: graph.v2_count(),
            got: padded_input.n_qubits(),
        });
    }
    match strategy {
        BobStrategy::Honest => graph.attach_input(padded_input),
        BobStrategy::ReplaceInput(sub) => graph.attach_input(sub),
        BobStrategy::ChannelOnInput(kraus) => {
            graph.attach_input(&padded_input.apply_channel(kraus)?)
        }
        BobStrategy::WrongGraph(alt) => alt.attach_input(padded_input),
        BobStrategy::ArbitraryState(rho) => Ok(rho.clone()),
    }
}

/// Pure-state response path for the strategies that keep purity.
pub fn bob_respond_pure(
    strategy: &BobStrategy,
    padded_input: &StateVector,
    graph: &ProtocolGraph,
) -> Result<StateVector> {
    strategy.validate(graph)?;
    match strategy {
        BobStrategy::Honest => graph.attach_input_pure(padded_input),
        BobStrategy::WrongGraph(alt) => alt.attach_input_pure(padded_input),
        _ => Err(Error::BadParameter(
            "strategy has no pure-state response".into(),
        )),
    }
}
