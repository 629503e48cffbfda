use thiserror::Error;

#[derive(Debug, Error)]
pub enum TorusMeasureError {
    /// Every Fourier magnitude stays within 1e-9 of 1 on the scanned lattice,
    /// so no mixing-DC parameters can be fitted (Dirac measures, for example).
    #[error("degenerate measure")]
    DegenerateMeasure,

    #[error("invalid measure: {0}")]
    InvalidMeasure(String),

    #[error("measure file: {0}")]
    Parse(String),
}
