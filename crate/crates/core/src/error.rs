use thiserror::Error;

/// Errors raised by the numerical modules.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Objects that must share structure do not (grid mismatch, malformed
    /// operator, non-normal-ordered input, ...).
    #[error("structural error: {0}")]
    Structural(String),
    #[error("invalid argument: {0}")]
    Argument(String),
    /// A value lies outside the domain where the construction is defined.
    #[error("domain error: {0}")]
    Domain(String),
    #[error("grid coverage error: {0}")]
    Coverage(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    /// Two independent evaluations that must agree did not.
    #[error("accuracy error: {0}")]
    Accuracy(String),
    #[error("numeric failure: {0}")]
    Numeric(String),
    /// Time stepping broke down; carries the last finite state `(t, p, q)`.
    #[error("singularity or stiffness at t = {t}: last valid state (p, q) = ({p}, {q}); {reason}")]
    Singularity {
        t: f64,
        p: f64,
        q: f64,
        reason: String,
    },
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
