//! Error type shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum TfrwError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Zero-norm state; the post-selected branch is empty.
    #[error("degenerate state: wavefunction has zero norm")]
    DegenerateState,

    #[error("grid mismatch: operands live on different scale-factor grids")]
    GridMismatch,

    #[error("quadrature failed to converge: achieved {achieved:.3e}, requested {requested:.3e}")]
    QuadratureFailure { achieved: f64, requested: f64 },

    /// Coarse scan found more than one local maximum; brackets of each.
    #[error("|q(r)| is not unimodal on the search interval; maxima bracketed by {brackets:?}")]
    NonUnimodal { brackets: Vec<(f64, f64)> },

    #[error("packet support escapes the grid under scaling; lost probability mass {lost_mass:.3e}")]
    SupportTruncation { lost_mass: f64 },

    #[error("no detection: post-selected branch has zero weight")]
    NoDetection,

    #[error("mirror collapsed to non-positive cavity length at step {step}")]
    Collapse { step: usize },

    #[error("singularity: scale factor must be strictly positive")]
    Singularity,

    #[error("invalid range: {0}")]
    InvalidRange(String),

    #[error("configuration error: {0}")]
    Configuration(String),
}

pub type Result<T> = std::result::Result<T, TfrwError>;
