use thiserror::Error;

/// Errors raised by the mechanism model, workspace analysis and optimizer.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum MechError {
    /// An argument violates its documented invariant.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("tilt ({alpha}, {beta}) rad is outside the universal-joint range |angle| <= pi/2")]
    TiltOutOfRange { alpha: f64, beta: f64 },

    /// A spherical joint sits on top of its base universal joint.
    #[error("leg {leg} is degenerate (length {length:e} m)")]
    DegenerateLeg { leg: usize, length: f64 },

    #[error("singular configuration: Newton step is undefined")]
    Singular,

    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("expected a vector of dimension {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
}

pub type Result<T, E = MechError> = std::result::Result<T, E>;
