//! Error type shared across the crate.

use alloc::string::String;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A scalar argument is outside its mathematical domain.
    #[error("domain error: {0}")]
    Domain(&'static str),

    /// Array or matrix dimensions do not line up.
    #[error("shape error: expected {expected}, got {actual} ({context})")]
    Shape {
        expected: usize,
        actual: usize,
        context: &'static str,
    },

    /// Input data is unusable (non-finite values, too few rows, ...).
    #[error("data error: {0}")]
    Data(String),

    /// A model fit could not be carried out on the given inputs.
    #[error("fit error: {0}")]
    Fit(String),

    /// Inconsistent configuration of a multi-step computation.
    #[error("configuration error: {0}")]
    Config(String),

    /// A numerical procedure failed (singular solve, search exhausted, ...).
    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl Error {
    pub(crate) fn shape(expected: usize, actual: usize, context: &'static str) -> Self {
        Error::Shape {
            expected,
            actual,
            context,
        }
    }
}
