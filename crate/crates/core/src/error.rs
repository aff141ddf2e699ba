use thiserror::Error;

/// Errors raised by the evaluators, verifiers and checkers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A structural zero landed in a denominator.
    #[error("pole: {0}")]
    Pole(String),

    /// A series or product did not reach its tail threshold within the term cap.
    #[error("no convergence after {terms} terms (last term magnitude {last:e})")]
    NonConvergence { terms: usize, last: f64 },

    /// An SL(2,Z) matrix with determinant other than one.
    #[error("determinant ad - bc = {0}, expected 1")]
    Determinant(i64),

    /// Parameter lists whose lengths do not fit the requested operation.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// A parameter set violates its balancing or truncation constraints.
    #[error("constraint violated: {0}")]
    Constraint(String),

    /// A square-root branch could not be fixed unambiguously.
    #[error("branch ambiguity: {0}")]
    Branch(String),

    /// The sampler ran out of retries.
    #[error("sampling failed: {0}")]
    Sampling(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
