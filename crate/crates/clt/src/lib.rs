//! Asymptotic variance of Birkhoff sums over random translation chains, and
//! empirical checks of the central limit theorem itself.
//!
//! With psi = sum_n Q^n phi, the variance sigma^2 = ||psi||^2 - ||Q psi||^2
//! collapses on the Fourier side to an explicit sum over the frequency
//! support of phi. A truncated-series evaluator with a rigorous tail bound
//! keeps that closed form honest, and [`clt_experiment`] tests the
//! distributional statement against simulated chains.

mod error;
mod experiment;
mod variance;

pub use error::CltError;
pub use experiment::{clt_experiment, ks_against_normal, CltReport};
pub use variance::{
    gordin_livsic_sigma2, positivity_check, sigma2_closed, sigma2_series, VarianceMethod,
    VarianceResult, DEFAULT_SERIES_TERMS, MEAN_TOL, POSITIVITY_TOL, SUMMABILITY_TOL,
};
