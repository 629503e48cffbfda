use thiserror::Error;

#[derive(Debug, Error)]
pub enum HolonomyError {
    /// An inverse or forward shift needs a symbol outside the stored range.
    #[error("window exhausted")]
    WindowExhausted,
    /// Holonomy endpoints must share the past and the fiber coordinate.
    #[error("not on same fiber")]
    NotOnSameFiber,
    /// A randomized construction self-check failed; the reduction formula
    /// did not produce what the theory promises.
    #[error("internal inconsistency: {0}")]
    Internal(String),
    #[error("observable file: {0}")]
    Parse(String),
    /// Tabular construction got inconsistent dimensions or row counts.
    #[error("invalid observable: {0}")]
    InvalidObservable(String),
}
