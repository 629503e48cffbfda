//! Probability measures on the torus T^d = (R/Z)^d.
//!
//! A measure is atomic, exact Lebesgue, a gridded density (midpoint
//! quadrature), or a convex mixture of two measures. Every measure knows its
//! Fourier coefficients
//!
//! ```text
//! mu_hat(k) = integral of exp(2 pi i <k, x>) dmu(x),   k in Z^d,
//! ```
//!
//! can be sampled with a caller-owned RNG, and can be tested against the
//! mixing Diophantine condition |mu_hat(k)| <= 1 - gamma/|k|^tau (sup-norm on
//! the lattice). All objects are immutable after construction and all
//! operations are pure.

mod dc;
mod error;
mod file;
mod measure;
mod point;

pub use dc::{check_mixing_dc, fit_mixing_dc, is_ergodic_condition, DCReport, MixingDCParams};
pub use error::TorusMeasureError;
pub use file::{key_value_lines, measure_preset, parse_measure_file, parse_measure_str};
pub use measure::{TorusMeasure, DEFAULT_GRID_1D, DEFAULT_GRID_2D, GOLDEN_MEAN_CONJUGATE};
pub use point::{fract_unit, TorusPoint};
