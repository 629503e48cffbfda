//! Truncated Fourier calculus for observables of random translation chains.
//!
//! A [`FourierObservable`] is a real trigonometric polynomial on T^d. The
//! Markov operator of a random translation chain acts diagonally on its
//! coefficients (`Q e_k = mu_hat(k) e_k`), which makes n-step deviation
//! bounds a coefficient sum instead of an n-fold iteration: see
//! [`deviation_after_n`] and [`decay_trace`]. Fitted power rates come from
//! [`fit_power_rate`]; arbitrary Hölder functions enter through equispaced
//! sampling and a Jackson-kernel taper in [`holder_to_fourier`], with the
//! truncation degree rule in [`jackson_degree`].

mod error;
mod file;
mod fit;
mod jackson;
mod markov;
mod observable;

pub use error::SpectralError;
pub use file::{parse_observable_file, parse_observable_str};
pub use fit::{
    fit_power_rate, jackson_degree, MixingProfile, MixingRate, Provenance, FIT_FLOOR,
};
pub use jackson::{
    holder_to_fourier, jackson_taper_weights, SEMINORM_PAIRS, TRUNCATION_CONST,
};
pub use markov::{
    apply_markov, decay_trace, deviation_after_n, deviation_bound, grid_oscillation_sup,
    DecayRow, DecayTrace, TRACE_DOMINANCE_TOL, UNIT_MAGNITUDE_CLAMP,
};
pub use observable::{observable_preset, FourierObservable, HERMITIAN_TOL};
