// Copyright 2026 The qsynth Authors
// SPDX-License-Identifier: Apache-2.0

use thiserror::Error;

/// Errors raised by the synthesis library.
///
/// Everything except [`Error::Io`] is a validation failure: the caller handed
/// in data that violates a precondition.
#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix is not Hermitian (max deviation {deviation:.3e})")]
    NotHermitian { deviation: f64 },

    #[error("matrix is not unitary (max deviation of U\u{2020}U from identity {deviation:.3e})")]
    NotUnitary { deviation: f64 },

    #[error("state vector has norm {norm}, expected 1")]
    NotNormalized { norm: f64 },

    #[error("zero vector")]
    ZeroVector,

    #[error("invalid dimension {0}: at least 2 levels are required")]
    InvalidDimension(usize),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },

    #[error("segment {segment}: duration {duration} must be positive and finite")]
    InvalidDuration { segment: usize, duration: f64 },

    #[error("segment {segment}: expected {expected} control amplitudes, found {found}")]
    ControlCountMismatch {
        segment: usize,
        expected: usize,
        found: usize,
    },

    #[error("segment {segment}: amplitude {value} of control {control} outside [{min}, {max}]")]
    AmplitudeOutOfBounds {
        segment: usize,
        control: usize,
        value: f64,
        min: f64,
        max: f64,
    },

    #[error("drift cannot be time-reversed: the system is not flagged reversible")]
    IrreversibleDrift,

    #[error("plan step {step} has no mapper")]
    MissingMapper { step: usize },

    #[error("basis vectors {i} and {j} are not orthonormal (overlap {overlap:.3e})")]
    NotOrthonormal { i: usize, j: usize, overlap: f64 },

    #[error("invalid spin: 2F = {0}")]
    InvalidSpin(i64),

    #[error("m = {m} is not a valid projection for F = {f}")]
    InvalidProjection { f: f64, m: f64 },

    #[error("gcd({a}, {d}) != 1")]
    NotCoprime { a: i64, d: usize },

    #[error("unknown gate `{0}`")]
    UnknownGate(String),

    #[error("invalid auxiliary state {0}: expected +4 or -4")]
    InvalidAux(i32),

    #[error("measurement outcome {0} has zero probability")]
    ZeroProbabilityBranch(&'static str),

    #[error("state has weight {weight:.3e} outside the spin block")]
    OutsideBlock { weight: f64 },

    #[error("{field}: {reason}")]
    InvalidConfig { field: String, reason: String },

    #[error("row {row}: {reason}")]
    Csv { row: usize, reason: String },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn config(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidConfig {
            field: field.into(),
            reason: reason.into(),
        }
    }

    /// True for errors caused by bad input rather than the environment.
    pub fn is_validation(&self) -> bool {
        !matches!(self, Error::Io(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
