use crate::rounding::RoundingTrace;

/// Crate-wide error type.
///
/// `InvalidInput` covers malformed or inconsistent problem data (bad indices,
/// violated instance invariants, unparsable JSON). `Contract` flags a caller
/// breaking a documented precondition. The remaining variants are raised by
/// the solvers themselves.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("numerical failure in LP solver: {0}")]
    Numerical(String),

    #[error("cut limit reached after adding {cuts} rows (delta={delta})")]
    CutLimit { cuts: usize, delta: f64 },

    #[error("randomized rounding exhausted {restarts} restarts without an accepted draw")]
    RestartsExhausted {
        restarts: usize,
        trace: Box<RoundingTrace>,
    },

    #[error("infeasible: {0}")]
    Infeasible(String),
}

pub type Result<T> = std::result::Result<T, Error>;
