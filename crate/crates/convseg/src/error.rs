//! Error type shared across the crate.

use std::path::PathBuf;

/// Errors produced by construction, clustering, solving, and I/O.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Data buffer length does not match the declared dimensions.
    #[error("dimension mismatch: expected {expected} values, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// An intensity or palette component lies outside [0, 1].
    #[error("{what} out of range: {value} not in [0, 1]")]
    OutOfRange { what: &'static str, value: f64 },

    /// A palette needs at least two colors.
    #[error("palette has {k} colors, need at least 2")]
    PaletteTooSmall { k: usize },

    /// Two palette entries are byte-for-byte identical.
    #[error("palette entries {first} and {second} are identical")]
    PaletteDuplicate { first: usize, second: usize },

    /// Field label count does not match the palette size.
    #[error("label count mismatch: field has {field} labels, palette has {palette}")]
    LabelMismatch { field: usize, palette: usize },

    /// Two arrays that must share a shape do not.
    #[error("shape mismatch between {left} and {right}")]
    ShapeMismatch {
        left: &'static str,
        right: &'static str,
    },

    /// A NaN or infinity appeared where only finite values are valid.
    #[error("non-finite value in {what}")]
    NonFinite { what: &'static str },

    /// A weight that must be nonnegative was negative.
    #[error("{what} must be nonnegative, got {value}")]
    NegativeWeight { what: &'static str, value: f64 },

    /// Histogram contains no samples, so no peaks can be counted.
    #[error("histogram is empty")]
    EmptyHistogram,

    /// K-means was asked for more clusters than there are distinct colors.
    #[error("k-means needs k <= distinct colors: k = {k}, distinct = {distinct}")]
    TooFewColors { k: usize, distinct: usize },

    /// Step sizes violate the convergence condition sigma * tau * 8 <= 1.
    #[error("step sizes violate sigma*tau*L^2 <= 1 (L^2 = 8): sigma = {sigma}, tau = {tau}")]
    StepSize { sigma: f64, tau: f64 },

    /// The iteration produced NaN/Inf state: the solve diverged.
    #[error("solver diverged at iteration {iter} (non-finite state)")]
    Divergence { iter: usize },

    /// Mutually exclusive options were both supplied.
    #[error("conflicting options: {what}")]
    ConflictingOptions { what: &'static str },

    /// A parameter failed validation.
    #[error("invalid parameter {what}: {why}")]
    InvalidParameter { what: &'static str, why: String },

    /// A file could not be read or decoded.
    #[error("cannot read {path}: {reason}")]
    FileRead { path: PathBuf, reason: String },

    /// A file could not be written.
    #[error("cannot write {path}: {reason}")]
    FileWrite { path: PathBuf, reason: String },
}

pub type Result<T> = std::result::Result<T, Error>;
