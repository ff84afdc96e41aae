//! Hand-rolled emission network and optimiser.

pub mod adam;
pub mod mlp;

pub use adam::{AdamHyper, AdamState};
pub use mlp::{Mlp, MlpGrads, Mode, BN_EPS, BN_MOMENTUM, HIDDEN_BLOCKS, HIDDEN_WIDTH};
