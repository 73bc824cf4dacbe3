use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("probability {0} is outside the open interval (0, 1)")]
    InvalidProbability(f64),

    #[error("degrees of freedom must be at least 1")]
    ZeroDegreesOfFreedom,

    #[error("insufficient samples for dimension {dimension}: {dof} degrees of freedom available")]
    InsufficientSamples { dimension: usize, dof: usize },

    #[error("a sample set needs at least 2 samples, got {0}")]
    TooFewSamples(usize),

    #[error("sample {index} has length {found}, expected {expected}")]
    RaggedSamples {
        index: usize,
        expected: usize,
        found: usize,
    },

    #[error("degenerate covariance: eigenvalue ratio {ratio:e} is below the 1e-12 threshold")]
    DegenerateCovariance { ratio: f64 },

    #[error("risk level {0} must lie in (0, 0.5)")]
    InvalidRisk(f64),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("conic backend failed at node {node}: {reason}")]
    Backend { node: usize, reason: String },
}
