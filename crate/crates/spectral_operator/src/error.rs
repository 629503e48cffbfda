use thiserror::Error;

#[derive(Debug, Error)]
pub enum SpectralError {
    /// A power-rate fit needs at least 3 strictly positive bound values.
    #[error("insufficient points")]
    InsufficientPoints,
    /// Sampling below the Nyquist limit of the requested radius.
    #[error("resolution too low")]
    ResolutionTooLow,
    #[error("invalid observable: {0}")]
    InvalidObservable(String),
    #[error("observable file: {0}")]
    Parse(String),
}
