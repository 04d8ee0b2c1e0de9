//! Crate-wide error type.

use thiserror::Error;

/// Errors surfaced by model construction, numerics and solvers.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// A structural requirement on inputs was violated (sizes, orderings,
    /// feasibility of a power vector, ...).
    #[error("constraint violation: {0}")]
    ConstraintViolation(String),

    /// An operation was applied to a layout kind it is not defined for.
    #[error("layout kind mismatch: {0}")]
    KindMismatch(String),

    /// A scalar parameter is outside its admissible range.
    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    /// Array shapes do not line up.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// The requested evaluation point is outside the domain of a formula.
    #[error("domain error: {0}")]
    DomainError(String),

    /// Adaptive quadrature could not reach the requested tolerance.
    #[error("quadrature failure: {0}")]
    QuadratureFailure(String),

    /// A root bracket could not be established.
    #[error("bracket failure: {0}")]
    BracketFailure(String),

    /// No root exists for the requested equation.
    #[error("no root: {0}")]
    NoRoot(String),

    /// An operation restricted to one fading family was called with another.
    #[error("fading family mismatch: {0}")]
    FamilyMismatch(String),

    /// An enumeration budget guard tripped.
    #[error("budget exceeded: {0}")]
    BudgetExceeded(String),

    /// A feasibility region is empty.
    #[error("infeasible: {0}")]
    Infeasible(String),

    /// A well-posed problem has no solution in the admissible region.
    #[error("no solution: {0}")]
    NoSolution(String),
}
