use thiserror::Error;

/// Errors produced by the geometry, solver and sampling routines.
#[derive(Debug, Error)]
pub enum PoseError {
    #[error("degenerate projection: joint {joint} has non-positive depth {depth}")]
    DegenerateProjection { joint: usize, depth: f64 },

    #[error("degenerate human frame: {0}")]
    DegenerateFrame(String),

    #[error("infeasible depth during optimization: joint {joint} driven to depth {depth}")]
    InfeasibleDepth { joint: usize, depth: f64 },

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("degenerate configuration: {0}")]
    Degenerate(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("sampling failed: {0}")]
    SamplingFailed(String),
}

pub type Result<T> = std::result::Result<T, PoseError>;
