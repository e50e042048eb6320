use thiserror::Error;

/// Errors raised by the model, solver and search routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// The inputs are individually valid but do not fit together
    /// (e.g. a utility table sized for another issue set).
    #[error("configuration error: {0}")]
    Config(String),

    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// An enumeration would exceed its declared bound.
    #[error("capacity error: {what} needs {requested} entries, limit is {limit}")]
    Capacity {
        what: &'static str,
        requested: u128,
        limit: u128,
    },

    /// A government whose members hold no capability cannot decide anything.
    #[error("degenerate government {members:?}: members hold zero total capability")]
    DegenerateGovernment { members: Vec<String> },

    /// A nested or probe solve failed to reach its tolerance.
    #[error("limiting distribution did not converge after {iterations} iterations (residual {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
