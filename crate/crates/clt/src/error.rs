use thiserror::Error;

#[derive(Debug, Error)]
pub enum CltError {
    /// Some supported frequency has |mu_hat(k)| too close to 1, so the
    /// series sum_n Q^n phi does not converge in L^2.
    #[error("summability violated")]
    SummabilityViolated { k: Vec<i64>, magnitude: f64 },
    /// The observable must be centered before the asymptotic variance makes
    /// sense.
    #[error("nonzero mean")]
    NonzeroMean { mean: f64 },
    /// Positivity is only claimed for non-constant observables.
    #[error("constant observable")]
    ConstantObservable,
    /// The closed form produced a value the theory forbids.
    #[error("internal inconsistency: {0}")]
    Internal(String),
}
