use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A parameter lies outside the domain of the requested operation.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("mode index {index} out of range for {n_modes} mode(s)")]
    ModeIndex { index: usize, n_modes: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },

    /// The input modes do not share a common amplitude.
    #[error("unequal input amplitudes: {0}")]
    UnequalAmplitudes(String),

    /// The truncated Fock-space oracle would exceed its size or occupation guard.
    #[error("resource guard: {0}")]
    ResourceGuard(String),

    /// More probability was lost to truncation than the budget allows.
    #[error("trace deficit {deficit:.3e} exceeds budget {budget:.3e}")]
    DeficitBudget { deficit: f64, budget: f64 },

    #[error("too few samples: {0}")]
    Samples(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
