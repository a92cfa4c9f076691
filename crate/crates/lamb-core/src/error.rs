//! Crate-wide error type.

use thiserror::Error;

/// Errors produced anywhere in the library.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// A constructor or validator rejected its input.
    #[error("invalid input: {0}")]
    Invalid(String),

    /// Syntax error in a force expression, with the byte offset of the
    /// offending token in the original source string.
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },

    /// A force expression hit an undefined operation while being evaluated.
    #[error("evaluation error at y = {y}: {message}")]
    Eval { y: f64, message: String },

    /// Time stepping aborted; `t` is the last time with a finite state.
    #[error("integration aborted at t = {t}: {message}")]
    Integration { t: f64, message: String },

    /// The restoring force does not push back towards the origin at large
    /// amplitude, so no trapping region exists.
    #[error("coercivity check failed: {0}")]
    Coercivity(String),

    /// Return-map iteration or root finding exhausted its budget.
    #[error("no convergence: {0}")]
    NoConvergence(String),

    /// Seed orbits of the return map escaped every candidate bounding box.
    #[error("dissipativity failure: {0}")]
    Dissipativity(String),

    /// A trajectory was asked for a time outside the span it covers.
    #[error("time {t} outside trajectory span [{t0}, {t1}]")]
    OutOfSpan { t: f64, t0: f64, t1: f64 },

    /// Two sampled objects that must share a grid do not.
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Shorthand used by validators.
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }
}
