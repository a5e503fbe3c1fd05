//! Unsupervised semantic role induction.
//!
//! A log-linear role labeler (the encoder) is trained jointly with a
//! bilinear model that reconstructs each argument lemma from the predicate,
//! the induced roles and the other arguments. Reconstruction error, made
//! tractable with mean-field posteriors and negative sampling, is the only
//! training signal. At test time only the encoder is used.

pub mod corpus;
pub mod encoder;
pub mod error;
pub mod features;
pub mod metrics;
pub mod model;
pub mod recon;
mod sparse;
pub mod synth;
pub mod trainer;

pub use error::{Error, Result};
pub use model::{label, load_model, save_model, Model};
pub use sparse::SparseRows;
pub use trainer::{train, TrainConfig};
