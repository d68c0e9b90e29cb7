//! Error type shared by all modules.

use thiserror::Error;

/// Everything that can go wrong while building or certifying a run.
#[derive(Debug, Error)]
pub enum Error {
    /// Field data contains NaN or infinite samples.
    #[error("invalid field: {0}")]
    InvalidField(String),

    /// Derivative axis outside 0..dim.
    #[error("invalid axis {axis} for dimension {dim}")]
    InvalidAxis { axis: usize, dim: usize },

    /// Snapshot file violates the FLD1 format.
    #[error("format error at byte {offset}: {reason}")]
    Format { offset: u64, reason: String },

    /// Solver state violates an invariant (e.g. nonzero mean vorticity).
    #[error("invalid state: {0}")]
    InvalidState(String),

    /// Time step exceeds the advective stability limit.
    #[error("CFL violation: dt = {dt:.3e} exceeds max admissible dt = {max_dt:.3e}")]
    Cfl { dt: f64, max_dt: f64 },

    /// Matrix input is not symmetric within tolerance.
    #[error("invalid matrix: {0}")]
    InvalidMatrix(String),

    /// Mismatched grid dimensions or component counts.
    #[error("dimension mismatch: {0}")]
    Dim(String),

    /// Tensor field violates symmetry/trace constraints pointwise.
    #[error("invalid tensor field at grid point {index:?}: defect {defect:.3e}")]
    InvalidTensorField { index: Vec<usize>, defect: f64 },

    /// Negative or otherwise inadmissible time argument.
    #[error("invalid time: {0}")]
    InvalidTime(String),

    /// Oscillation frequency not resolved on the grid after dealiasing.
    #[error("alias error: {0}")]
    Alias(String),

    /// Certification inputs are missing or inconsistent.
    #[error("input error: {0}")]
    Input(String),

    /// Report or snapshot could not be written.
    #[error("write error: {0}")]
    Write(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
