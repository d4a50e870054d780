use crate::semiring::SemifieldKind;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("semifield kind mismatch: {left:?} vs {right:?}")]
    KindMismatch {
        left: SemifieldKind,
        right: SemifieldKind,
    },

    #[error("power of zero with non-positive exponent {exponent}")]
    UndefinedPower { exponent: f64 },

    #[error("value {value} is outside the carrier of {kind:?}")]
    Domain { kind: SemifieldKind, value: f64 },

    #[error("shape mismatch in {op}: {left:?} vs {right:?}")]
    ShapeMismatch {
        op: &'static str,
        left: (usize, usize),
        right: (usize, usize),
    },

    #[error("{op} requires a square matrix, got {rows}x{cols}")]
    NotSquare {
        op: &'static str,
        rows: usize,
        cols: usize,
    },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("invalid model: {0}")]
    ModelInvalid(String),

    #[error("existence of the Lyapunov exponent not verified: {0}")]
    ExistenceUnverified(String),

    #[error("decomposition factors are not independent: shared leaves {0}")]
    DependencyViolation(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
