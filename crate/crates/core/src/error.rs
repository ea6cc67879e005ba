use thiserror::Error;

/// Errors raised by the numerical and exact routines of this crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("argument {x} lies within {tol:e} of the pole at {pole}")]
    PoleProximity { x: f64, pole: f64, tol: f64 },

    #[error("gamma = {0} lies within 1e-3 of an integer; integer orders are excluded")]
    IntegerGamma(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("{what} did not converge after {terms} terms")]
    NonConvergence { what: &'static str, terms: usize },

    #[error("argument x = {0} > 1/2 has no series route for these parameters; use the ODE route")]
    NeedsOdeRoute(f64),

    #[error("lambda * y_max = {0} exceeds the overflow guard")]
    Overflow(f64),

    #[error("expansion fit residual {residual:e} exceeds {tolerance:e} (relative to |a|)")]
    FitResidual { residual: f64, tolerance: f64 },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("linear solve failed: {0}")]
    LinearSolve(String),

    #[error("matching Wronskian {0:e} is degenerate")]
    MatchingSingular(f64),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
