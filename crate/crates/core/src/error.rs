use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("non-finite value encountered in {0}")]
    NonFinite(&'static str),

    #[error("numeric failure: {0}")]
    NumericFailure(String),

    #[error("root did not converge after {iterations} iterations (last residual {residual:e})")]
    NotConverged { iterations: usize, residual: f64 },

    #[error("branch collision: roots {first} and {second} coincide at g' = {g_prime} away from any exceptional point")]
    BranchCollision {
        g_prime: f64,
        first: usize,
        second: usize,
    },

    #[error("mixing angle is only defined in the broken phase (|g| = {0} <= 1)")]
    InvalidPhase(f64),

    #[error("eigenmode grids do not match")]
    GridMismatch,

    #[error("no sign change bracketing the root: {0}")]
    BracketFailure(String),

    #[error("mode cutoff too small: tail contribution {tail:e} exceeds tolerance {tol:e}")]
    CutoffTooSmall { tail: f64, tol: f64 },

    #[error("degenerate unperturbed modes in second-order sum")]
    DegenerateModes,

    #[error("degenerate time stamps: {0}")]
    DegenerateTimestamps(String),

    #[error("empty series: {0}")]
    EmptySeries(String),

    #[error("fit did not converge after {0} iterations")]
    FitNotConverged(usize),

    #[error("rank-deficient system: {0}")]
    RankDeficient(String),

    #[error("calibration matrix is degenerate (|det| = {0:e})")]
    DegenerateCalibration(f64),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
