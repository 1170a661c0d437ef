//! Two-layer LSTM next-word model written out by hand: embedding, two
//! stacked LSTM layers and a dense softmax output, trained with
//! backpropagation through time.

mod cell;
mod checkpoint;
mod model;
mod params;
mod train;

use thiserror::Error;

pub use cell::lstm_cell_step;
pub use checkpoint::{
    checkpoint_bytes, load_checkpoint, params_fingerprint, CheckpointHeader, TensorEntry, CHECKPOINT_MAGIC,
    CHECKPOINT_VERSION,
};
pub use model::{
    backward, backward_row, forward, has_target, loss, loss_and_gradients, sequence_loss, target_count,
    LayerActivations, PROB_FLOOR,
};
pub use params::{
    init_params, Gradients, LstmParams, ModelConfig, ModelParams, GATE_CANDIDATE, GATE_FORGET, GATE_INPUT,
    GATE_OUTPUT,
};
pub use train::{evaluate, train, train_with_validation, EpochRecord, Evaluation, OptimizerKind, TrainConfig};

#[derive(Debug, Error)]
pub enum RnnError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("token id {id} out of range for vocabulary of size {vocab_size}")]
    TokenOutOfRange { id: u32, vocab_size: usize },
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("non-finite loss at epoch {epoch}, batch {batch}")]
    NonFiniteLoss { epoch: usize, batch: usize },
    #[error("training corpus is empty")]
    EmptyCorpus,
    #[error("model expects {model} vocabulary entries, corpus has {corpus}")]
    VocabMismatch { model: usize, corpus: usize },
    #[error("bad checkpoint: {0}")]
    BadCheckpoint(String),
    #[error(transparent)]
    Container(#[from] crate::container::ContainerError),
}
