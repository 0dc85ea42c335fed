use thiserror::Error;

use crate::dynamics::PathAbort;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    #[error("box sides p={p} and q={q} share a common factor")]
    NotCoprime { p: i64, q: i64 },

    #[error("bound {bound} exceeds the configured maximum {max}")]
    BoundExceeded { bound: i32, max: i32 },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("profile `{name}` is negative or non-finite ({value}) at |k|^2 = {norm2}")]
    InvalidProfile { name: &'static str, norm2: i64, value: f64 },

    #[error("mode set is not closed under k -> -k (missing {0})")]
    NotSymmetric(String),

    #[error("state has {got} entries, mode system has {expected}")]
    StateLength { expected: usize, got: usize },

    #[error(transparent)]
    Aborted(#[from] PathAbort),
}
