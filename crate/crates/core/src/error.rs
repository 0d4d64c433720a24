use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Unreadable input; `location` is a line/column or a field path.
    #[error("parse error at {location}: {message}")]
    Parse { location: String, message: String },

    /// The input graph is not a directed tree, or references unknown nodes.
    #[error("malformed instance: {0}")]
    MalformedInstance(String),

    #[error("invalid loss: {0}")]
    InvalidLoss(String),

    /// A caller broke a documented precondition.
    #[error("contract violation: {0}")]
    ContractViolation(String),

    /// An optimal point demanded a sign that an infinite weight forbids.
    #[error("certificate corruption on edge {edge}: {detail}")]
    CertificateCorruption { edge: usize, detail: String },

    /// One of the solver's internal guarantees failed (iteration bound,
    /// monotone parameter path, active-set churn, ...).
    #[error("internal invariant failed: {0}")]
    InvariantViolation(String),

    #[error("KKT certificate failed: residual {residual:e} exceeds {tolerance:e}")]
    CertificateFailed { residual: f64, tolerance: f64 },

    #[error("oracle size cap exceeded: {edges} edges (cap {cap})")]
    OracleTooLarge { edges: usize, cap: usize },

    #[error("no sign pattern passed the KKT screen")]
    OracleNoPattern,
}
