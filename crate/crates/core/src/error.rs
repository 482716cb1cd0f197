use thiserror::Error;

/// Errors produced by the solver stack.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("point ({x}, {y}) is outside the domain")]
    OutsideDomain { x: f64, y: f64 },

    #[error("gradient requested on the segment C at x = {x}; use a one-sided limit")]
    OnSegment { x: f64 },

    #[error("fundamental-solution charge landed inside the domain at ({x}, {y})")]
    ChargePlacement { x: f64, y: f64 },

    #[error("Dirichlet solve did not converge: residual {residual:.3e} (tol {tol:.1e}), condition {condition:.3e}")]
    SolveNotConverged {
        residual: f64,
        tol: f64,
        condition: f64,
    },

    #[error("GNP projection did not reach a fixed point after {sweeps} sweeps")]
    ProjectionFailed { sweeps: usize },

    #[error("boundary crossed the segment C while moving the domain")]
    BoundaryCrossedSegment,

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
