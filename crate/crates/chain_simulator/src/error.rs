use thiserror::Error;

#[derive(Debug, Error)]
pub enum ChainError {
    /// Exact enumeration would exceed the path cap (m^n > 10^7).
    #[error("state space too large")]
    StateSpaceTooLarge,
    /// Exact enumeration is only defined for finitely supported measures.
    #[error("exact enumeration needs an atomic measure")]
    NotAtomic,
}
