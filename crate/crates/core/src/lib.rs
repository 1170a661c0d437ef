//! Core library for probing construction-class geometry in a recurrent language model.
//!
//! The pipeline: [`corpus`] generates and encodes labeled sentences, [`rnn`]
//! trains a two-layer LSTM next-word predictor, [`probe`] reduces per-timestep
//! activations to one vector per sentence and layer, and [`geometry`] scores
//! and projects the resulting point clouds.

pub mod container;
pub mod corpus;
pub mod geometry;
pub mod matrix;
pub mod probe;
pub mod rnn;

pub use matrix::Matrix;

/// Lowercase hex SHA-256 of `bytes`.
pub fn sha256_hex(bytes: &[u8]) -> String {
    use sha2::{Digest, Sha256};
    hex::encode(Sha256::digest(bytes))
}
