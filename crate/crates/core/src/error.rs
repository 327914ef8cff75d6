use thiserror::Error;

use crate::linalg::Grid;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LabError {
    #[error("grid mismatch: operator lives on the {operator} grid, operand on the {operand} grid")]
    BilateralMismatch { operator: Grid, operand: Grid },

    #[error("no finite support-growth bound for {0}")]
    UnboundedGrowth(String),

    #[error("window {rows}x{cols} exceeds the cap of {cap}")]
    WindowOverflow { rows: usize, cols: usize, cap: usize },

    #[error("precondition violated: {0}")]
    PreconditionViolated(String),

    #[error("|z| = {0} is outside the open unit disk")]
    DomainError(f64),

    #[error("eigenvalue iteration did not converge after {0} iterations")]
    ConvergenceFailure(usize),

    #[error("zero vector")]
    ZeroVector,

    #[error("search failed: {0}")]
    SearchFailure(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, LabError>;
