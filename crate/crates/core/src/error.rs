use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("{op}: {msg}")]
    Domain { op: &'static str, msg: String },

    /// Adaptive quadrature ran out of its evaluation budget; carries the best estimate.
    #[error(
        "quadrature did not converge: estimate {estimate} (error estimate {abs_error_estimate}) after {evaluations} evaluations"
    )]
    Convergence {
        estimate: f64,
        abs_error_estimate: f64,
        evaluations: usize,
    },

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("series misaligned: {0}")]
    Alignment(String),
}

impl Error {
    pub(crate) fn domain(op: &'static str, msg: impl Into<String>) -> Self {
        Error::Domain {
            op,
            msg: msg.into(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
