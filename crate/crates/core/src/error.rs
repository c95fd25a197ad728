use alloc::string::String;

use thiserror::Error;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("reaction index {index} out of range for a network with {count} reactions")]
    ReactionOutOfRange { index: usize, count: usize },
    #[error("state index {index} out of range for a set of {len} states")]
    StateOutOfRange { index: usize, len: usize },
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("unknown built-in model `{0}`")]
    UnknownModel(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("restriction to an empty set of states")]
    EmptyKeepSet,
    #[error("pruning would remove every state")]
    AllStatesPruned,
    #[error("matrix exponential did not converge within {substeps} substeps (reached t = {reached} of {target})")]
    NonConvergence { substeps: usize, reached: f64, target: f64 },
    #[error("dense matrix of order {n} exceeds the limit of {max}")]
    MatrixTooLarge { n: usize, max: usize },
    #[error("box holds {count} states, above the cap of {cap}")]
    BoxTooLarge { count: u128, cap: usize },
    #[error("initial state lies outside the box")]
    OutsideBox,
    #[error("non-finite value encountered at t = {t}")]
    NonFinite { t: f64 },
}
