//! Error type shared by all analysis modules.

use thiserror::Error;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("qubit count mismatch: {left} vs {right}")]
    LengthMismatch { left: u32, right: u32 },

    #[error("matrix dimension mismatch: {left} vs {right}")]
    DimMismatch { left: usize, right: usize },

    #[error("{n} qubits exceeds the dense-matrix ceiling of {limit}")]
    DenseLimit { n: u32, limit: u32 },

    #[error("empty generator list")]
    EmptyGenerators,

    #[error("invalid site index {site} for {n} qubits")]
    SiteOutOfRange { site: u32, n: u32 },

    #[error("invalid topology: {0}")]
    InvalidTopology(String),

    #[error("unknown family identifier `{0}`")]
    UnknownFamily(String),

    #[error("unknown code identifier `{0}`")]
    UnknownCode(String),

    #[error("index {index} out of range (limit {limit})")]
    IndexOutOfRange { index: usize, limit: usize },

    #[error("total-spin label J={j} out of range for n={n}")]
    JOutOfRange { j: String, n: u32 },

    #[error("incompatible code families: {0}")]
    IncompatibleCodes(String),

    #[error("eigenvalue grouping failed: {0}")]
    EigenGrouping(String),

    #[error("iterative solve did not converge: {0}")]
    Convergence(String),

    #[error("generator set leaks off the code (leakage {leakage:.3e})")]
    LeakyGenerators { leakage: f64 },

    #[error("constraint set is not an isometry: {0}")]
    InconsistentConstraints(String),

    #[error("no coupling witness found within bracket depth {depth}")]
    NoWitness { depth: usize },

    #[error("too few samples: need at least {need}, got {got}")]
    TooFewSamples { need: usize, got: usize },

    #[error("{0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
