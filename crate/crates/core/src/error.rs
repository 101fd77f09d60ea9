use thiserror::Error;

/// Errors shared by every evaluator in the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum SieveError {
    /// A size limit (prime table, enumeration budget, search cap) was exceeded.
    #[error("capacity exceeded for {what}: requested {requested}, limit {limit}")]
    Capacity {
        what: &'static str,
        requested: u64,
        limit: u64,
    },
    /// An input violated the mathematical precondition of an operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// The input is well-formed but carries no usable information.
    #[error("degenerate input: {0}")]
    Degenerate(String),
    /// Some element of the target set is divisible by a sieving prime.
    #[error("{} element(s) divisible by a sieving prime, first ({}, {})", .witnesses.len(), .witnesses[0].0, .witnesses[0].1)]
    Divisibility { witnesses: Vec<(u64, u64)> },
    /// A work budget ran out part way; carries what was completed.
    #[error("work budget {budget} exhausted after moduli up to {completed_through} (partial sum {partial_sum})")]
    Budget {
        budget: u64,
        completed_through: u64,
        partial_sum: f64,
    },
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, SieveError>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(SieveError::Domain(msg.into()))
}
