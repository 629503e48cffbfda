use thiserror::Error;

#[derive(Debug, Error)]
pub enum ExpandingMapError {
    /// Model validation failed: wrong degree count, orientation, expansion,
    /// or lift periodicity.
    #[error("invalid map model: {0}")]
    InvalidModel(String),
    /// A monotone branch inversion could not bracket or polish its root;
    /// indicates an invalid model.
    #[error("branch solve failed")]
    BranchSolveFailed,
    /// Power iteration did not meet its residual within the iteration cap.
    #[error("no convergence")]
    NoConvergence,
    /// Too few usable ratios to fit an exponential mixing rate.
    #[error("no decay measured")]
    NoDecayMeasured,
    /// Map expression text did not parse.
    #[error("map expression: {0}")]
    Parse(String),
}
