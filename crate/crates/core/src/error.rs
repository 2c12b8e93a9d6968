use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An input lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// The floors cannot be met within the power budget, or a PCRB threshold
    /// cannot be reached by any finite power.
    #[error("infeasible: {reason}")]
    Infeasible {
        reason: String,
        deficit_w: Option<f64>,
    },

    /// The caller picked an allocator whose preconditions do not hold.
    #[error("contract violation: {0}")]
    Contract(String),

    #[error("no convergence after {iterations} iterations: {state}")]
    NotConverged { iterations: usize, state: String },

    #[error("refused: {0}")]
    Refused(String),

    #[error("config error: {0}")]
    Config(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn infeasible(reason: impl Into<String>, deficit_w: Option<f64>) -> Self {
        Error::Infeasible {
            reason: reason.into(),
            deficit_w,
        }
    }

    pub fn is_infeasible(&self) -> bool {
        matches!(self, Error::Infeasible { .. })
    }
}
