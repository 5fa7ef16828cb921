//! FOFE sequence codec and a multi-task feedforward NER model built on it.
//!
//! The crate has three layers:
//!
//! - [`fofe`]: the fixed-size ordinally forgetting encoding itself, with an
//!   exact-rational decoder (lossless for `alpha <= 1/2`) and a collision
//!   search for the `alpha > 1/2` regime.
//! - [`features`], [`nn`], [`mtl`]: candidate-span feature extraction, a
//!   from-scratch dense network (backprop, SGD with momentum, gradient
//!   checking), and the multi-task training engine with hard parameter
//!   sharing.
//! - [`pipeline`], [`io`]: span decoding and F1 scoring, CoNLL / word2vec /
//!   checkpoint I/O.
//!
//! All randomness is seeded; every entry point is deterministic given its
//! configuration.

pub mod config;
pub mod error;
pub mod features;
pub mod fofe;
pub mod io;
pub mod linalg;
pub mod model;
pub mod mtl;
pub mod nn;
pub mod pipeline;

pub use error::{Error, Result};
pub use model::{build_untrained, sweep_aux, train_model, Model, SweepRow, TaskSetup};
