//! Expanding circle maps and their backward Markov chains.
//!
//! A degree-D expanding map f on the circle carries a unique absolutely
//! continuous invariant density g, computed here by power iteration of the
//! transfer operator on a midpoint grid. Conditioning f on its past turns
//! the deterministic dynamics into a Markov chain that walks backward
//! through preimages, choosing branch y with probability
//! g(y) / (g(x) |f'(y)|). This crate builds the map models (presets or
//! parsed lift expressions), solves for g, exposes the forward transfer and
//! backward Markov operators on the grid, fits empirical mixing rates, and
//! simulates the backward chain for deviation and central-limit
//! experiments.

mod chain;
mod error;
mod expr;
mod grid;
mod model;
mod operator;

pub use chain::{backward_chain, expanding_clt, expanding_deviation};
pub use error::ExpandingMapError;
pub use expr::{model_from_expression, parse_expression, Expr};
pub use grid::{ks_two_sample, sample_from_density, DensityGrid, DensitySampler};
pub use model::{CircleMapModel, PREIMAGE_GAP, PREIMAGE_RESIDUAL_TOL, VALIDATION_GRID};
pub use operator::{
    invariant_density, markov_apply, markov_kernel_weights, markov_sigma2, mixing_rate_exp,
    transfer_apply, DecayTrace, DECAY_FLOOR,
};
