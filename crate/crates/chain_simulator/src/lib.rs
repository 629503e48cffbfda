//! Random-translation Markov chains on the torus: simulation, Birkhoff
//! sums, deviation probabilities (Monte Carlo and exact enumeration), and
//! the explicit large-deviation bound they are tested against.
//!
//! Determinism contract: trial i of a run draws from stream i of the config
//! seed ([`trial_rng`]), and estimators aggregate integer counts, so every
//! estimate is bit-identical across thread counts and scheduling orders.

mod chain;
mod error;
mod estimate;
mod ldt;
mod state;

pub use chain::{birkhoff_sum, initial_state, run_chain, trial_rng, ChainConfig, StartMode};
pub use error::ChainError;
pub use estimate::{
    deviation_probability, exact_deviation, DeviationEstimate, EstimateMethod, EXACT_PATH_CAP,
    Z95,
};
pub use ldt::{
    ldt_bound, ldt_constants, ldt_constants_raw, verify_ldt, with_start, LdtBound,
    LdtConstants, LdtReport, LdtRow, LDT_C_FLOOR,
};
pub use state::{step, SkewState};
