use thiserror::Error;

/// Errors shared by every layer of the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("qubit index {index} out of range for {n_qubits}-qubit state")]
    QubitIndex { index: usize, n_qubits: usize },

    #[error("qubit count mismatch: expected {expected}, got {got}")]
    SizeMismatch { expected: usize, got: usize },

    #[error("operands address the same qubit {0}")]
    EqualQubits(usize),

    #[error("matrix is not unitary (deviation {deviation:.3e})")]
    NotUnitary { deviation: f64 },

    #[error("matrix is not Hermitian (deviation {deviation:.3e})")]
    NotHermitian { deviation: f64 },

    #[error("matrix is not a density operator: {reason}")]
    NotDensity { reason: String },

    #[error("matrix is not a POVM element: {reason}")]
    NotPovm { reason: String },

    #[error("state vector is not normalized (norm {norm})")]
    NotNormalized { norm: f64 },

    #[error("state vector length {len} is not a power of two")]
    BadAmplitudeCount { len: usize },

    #[error("Pauli product carries an imaginary phase; not expressible with a ±1 sign")]
    ImaginaryPhase,

    #[error("generator set is not pairwise commuting (generators {0} and {1} anticommute)")]
    NonCommuting(usize, usize),

    #[error("generator set is dependent: a nonempty subset multiplies to ± identity")]
    DependentGenerators,

    #[error("invalid graph: {0}")]
    BadGraph(String),

    #[error("invalid Kraus family: sum of E†E deviates from identity by {deviation:.3e}")]
    BadKraus { deviation: f64 },

    #[error("invalid permutation over {0} elements")]
    BadPermutation(usize),

    #[error("invalid parameter: {0}")]
    BadParameter(String),

    #[error("conditioned state undefined: acceptance probability of the projector is zero")]
    ZeroPassProbability,

    #[error("measurement pattern does not fit the graph: {0}")]
    PatternMismatch(String),

    #[error("problem size infeasible: {0}")]
    Infeasible(String),
}
