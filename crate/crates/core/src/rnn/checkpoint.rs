//! `.ckpt` files: container with a JSON header carrying the model config and
//! a tensor manifest, followed by the tensors in manifest order.

use serde::{Deserialize, Serialize};

use super::params::{ModelConfig, ModelParams};
use super::RnnError;
use crate::container;

pub const CHECKPOINT_MAGIC: &[u8; 8] = b"ASCPCKPT";
pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TensorEntry {
    pub name: String,
    pub shape: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckpointHeader {
    pub config: ModelConfig,
    pub tensors: Vec<TensorEntry>,
    /// SHA-256 of the vocabulary file the model was trained against.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vocab_sha256: Option<String>,
}

fn manifest(config: &ModelConfig) -> Vec<TensorEntry> {
    let zeros = ModelParams::zeros(config.clone());
    zeros
        .tensors()
        .iter()
        .zip(ModelParams::shapes(config))
        .map(|((name, _), shape)| TensorEntry { name: name.to_string(), shape })
        .collect()
}

pub fn checkpoint_bytes(params: &ModelParams, vocab_sha256: Option<&str>) -> Vec<u8> {
    let header = CheckpointHeader {
        config: params.config.clone(),
        tensors: manifest(&params.config),
        vocab_sha256: vocab_sha256.map(str::to_string),
    };
    let header = serde_json::to_string(&header).expect("checkpoint header serializes");
    let payload: Vec<f64> = params.tensors().iter().flat_map(|(_, t)| t.iter().copied()).collect();
    container::write(CHECKPOINT_MAGIC, CHECKPOINT_VERSION, &header, &payload)
}

/// Parses a checkpoint, rejecting any version or manifest that does not
/// match what the stored config implies.
pub fn load_checkpoint(bytes: &[u8]) -> Result<(ModelParams, CheckpointHeader), RnnError> {
    let (header, payload) = container::read(bytes, CHECKPOINT_MAGIC, CHECKPOINT_VERSION)?;
    let header: CheckpointHeader =
        serde_json::from_str(header).map_err(|e| RnnError::BadCheckpoint(e.to_string()))?;
    header.config.validate()?;
    if header.tensors != manifest(&header.config) {
        return Err(RnnError::BadCheckpoint("tensor manifest does not match config".into()));
    }
    let mut params = ModelParams::zeros(header.config.clone());
    let expected: usize = params.num_scalars();
    if payload.len() != expected {
        return Err(RnnError::BadCheckpoint(format!(
            "payload has {} values, manifest needs {expected}",
            payload.len()
        )));
    }
    let mut offset = 0;
    for tensor in params.tensors_mut() {
        let n = tensor.len();
        tensor.copy_from_slice(&payload[offset..offset + n]);
        offset += n;
    }
    if !params.is_finite() {
        return Err(RnnError::BadCheckpoint("non-finite parameter".into()));
    }
    Ok((params, header))
}

/// SHA-256 of the checkpoint encoding of `params` without vocabulary tag.
pub fn params_fingerprint(params: &ModelParams) -> String {
    crate::sha256_hex(&checkpoint_bytes(params, None))
}
