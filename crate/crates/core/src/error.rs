use std::fmt;

use thiserror::Error;

use crate::linalg::LinalgError;

/// Which part of the solver an error came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    One,
    Two,
    Three,
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let n = match self {
            Phase::One => 1,
            Phase::Two => 2,
            Phase::Three => 3,
        };
        write!(f, "phase {n}")
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("infeasible domain: shortest side {shortest_side} is not positive")]
    InfeasibleDomain { shortest_side: f64 },
    #[error("bad bounds at coordinate {index}: x_L = {lower} is not below x_R = {upper}")]
    BadBounds {
        index: usize,
        lower: f64,
        upper: f64,
    },
    #[error("bad parameters: {0}")]
    BadParameters(String),
    #[error("non-finite input: {0}")]
    NonFinite(String),
    #[error("dimension mismatch in {what}: expected {expected}, got {got}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("numerical failure in {phase}: {detail}")]
    NumericalFailure { phase: Phase, detail: String },
    #[error("phase 2 entry condition violated: (1/Delta)*|grad phi2(x_I)| = {measure} > 1/2")]
    EntryConditionViolated { measure: f64 },
    #[error("dimension {n} too large for the grid oracle (max 3)")]
    DimensionTooLarge { n: usize },
    #[error("no sign change of the derivative on [{a}, {b}]")]
    NoSignChange { a: f64, b: f64 },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit code used by the command-line front end and the C API.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parse(_) | Error::Io(_) => 2,
            Error::InfeasibleDomain { .. }
            | Error::BadBounds { .. }
            | Error::BadParameters(_)
            | Error::NonFinite(_)
            | Error::DimensionMismatch { .. } => 3,
            Error::Linalg(_) | Error::NumericalFailure { .. } | Error::NoSignChange { .. } => 4,
            Error::EntryConditionViolated { .. } => 5,
            Error::DimensionTooLarge { .. } => 6,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
