use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("invalid state vector: {0}")]
    InvalidState(String),

    #[error("invalid density matrix: {0}")]
    InvalidDensity(String),

    #[error("empty ensemble")]
    EmptyEnsemble,

    #[error("qubit index {index} out of range for {limit} qubits")]
    QubitOutOfRange { index: usize, limit: usize },

    #[error("classical bit index {index} out of range for {limit} bits")]
    ClassicalBitOutOfRange { index: usize, limit: usize },

    #[error("classical bit c{0} read before any measurement wrote it")]
    UnsetClassicalBit(usize),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("program uses {qubits} qubits, exact simulation capped at {cap}")]
    QubitCapExceeded { qubits: usize, cap: usize },

    #[error("program contains {measurements} measurements, branch cap is {cap}")]
    BranchCapExceeded { measurements: usize, cap: usize },

    #[error("postselection still failing after {retries} retries")]
    PostselectionExhausted { retries: usize },

    #[error("invalid multiset label: {0}")]
    InvalidLabel(String),

    #[error("vector of dimension {dim} exceeds cap {cap}")]
    VectorCapExceeded { dim: usize, cap: usize },

    #[error("invalid relation circuit: {0}")]
    InvalidRelation(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}
