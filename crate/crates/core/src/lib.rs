//! Room-level indoor localisation and behavioural analytics, desk-scale.
//!
//! The crate covers the full pipeline on synthetic data:
//!
//! - [`sim`] generates houses, scripted walkthrough (training) traces and
//!   free-living (test) traces of RSSI + accelerometer data with ground
//!   truth room labels;
//! - [`features`] turns raw streams into windowed per-gateway summary
//!   features and activity levels;
//! - [`kmm`] estimates covariate-shift importance weights by kernel mean
//!   matching with a from-scratch projected-gradient QP solver;
//! - [`nn`] is a small fully-connected emission network with
//!   batch-normalization, hand-written backprop and Adam;
//! - [`crf`] is a linear-chain CRF with neural emissions, activity-gated
//!   transitions, exact inference, Viterbi decoding and hard-EM
//!   self-training;
//! - [`behaviour`] computes shadowing (mutual information), wandering
//!   (Lempel-Ziv complexity, per-room activity) and sleep-disturbance
//!   summaries from decoded sequences.
//!
//! All randomness is ChaCha8 seeded from a single root seed (see [`rng`]),
//! so every artefact is reproducible bit-for-bit.

pub mod behaviour;
pub mod crf;
pub mod error;
pub mod features;
pub mod kmm;
pub mod nn;
pub mod rng;
pub mod sim;

pub use error::{Error, Result};
pub use sim::{GroundTruthTrace, HouseLayout, Persona, SimConfig};
