//! Holonomy reduction over the two-sided random environment.
//!
//! States pair a bi-infinite symbol sequence (stored on a finite window,
//! canonical fill beyond it) with a fiber point on the torus. The crate
//! provides the inverse skew dynamics, the shift metric, holonomies along
//! unstable fibers, and the reduction of a finite-window observable phi to
//! a past-measurable phi_minus with exact transfer term eta:
//!
//! ```text
//! phi - phi_minus o f = eta - eta o f
//! ```
//!
//! Every sum involved is finite because window observables stop seeing a
//! difference after finitely many backward steps, so the identity can be
//! checked pointwise at floating-point precision rather than statistically.

mod error;
mod file;
mod observable;
mod reduction;
mod sequence;

pub use error::HolonomyError;
pub use file::{parse_window_file, parse_window_str};
pub use observable::{WindowObservable, WINDOW_CHECK_TOL};
pub use reduction::{
    holder_seminorm_estimate, reduce_to_past, reduce_to_past_with, unstable_holonomy,
    verify_cohomology, HolonomyPair, REDUCTION_CHECK_TOL,
};
pub use sequence::{
    future_project, same_fiber, sampled_state, shift_metric, skew_forward, skew_inverse,
    uniform_state, BiSequence, SkewBiState, COORD_EQ_TOL,
};
