//! Sentence-level representations: one vector per sentence and layer,
//! pooled from per-timestep activations.

use std::collections::BTreeMap;
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::container::{self, ContainerError};
use crate::corpus::{Construction, EncodedCorpus};
use crate::geometry::{GeometryError, LabeledPointSet};
use crate::rnn::{forward, LayerActivations, ModelParams, RnnError};
use crate::Matrix;

pub const ACTIVATIONS_MAGIC: &[u8; 8] = b"ASCPACTS";
pub const ACTIVATIONS_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum ProbeError {
    #[error("sentence has no real timesteps")]
    EmptySentence,
    #[error("model vocabulary has {model} entries but the corpus uses {corpus}")]
    VocabMismatch { model: usize, corpus: usize },
    #[error("row {row}: {source}")]
    Forward { row: usize, source: RnnError },
    #[error("non-finite representation for row {row} in layer {layer}")]
    NonFinite { row: usize, layer: LayerId },
    #[error("activation table: {0}")]
    Container(#[from] ContainerError),
    #[error("activation table header: {0}")]
    Header(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LayerId {
    Embedding = 1,
    Lstm1 = 2,
    Lstm2 = 3,
    Output = 4,
}

impl LayerId {
    pub const ALL: [LayerId; 4] = [LayerId::Embedding, LayerId::Lstm1, LayerId::Lstm2, LayerId::Output];

    pub fn as_str(self) -> &'static str {
        match self {
            LayerId::Embedding => "embedding",
            LayerId::Lstm1 => "lstm1",
            LayerId::Lstm2 => "lstm2",
            LayerId::Output => "output",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|l| l.as_str() == s)
    }

    pub fn index(self) -> usize {
        self as usize
    }

    /// Width of this layer's representation for a given model.
    pub fn width(self, params: &ModelParams) -> usize {
        let c = &params.config;
        match self {
            LayerId::Embedding => c.embedding_dim,
            LayerId::Lstm1 => c.hidden_dim_1,
            LayerId::Lstm2 => c.hidden_dim_2,
            LayerId::Output => c.vocab_size,
        }
    }

    fn rows(self, acts: &LayerActivations) -> &Matrix {
        match self {
            LayerId::Embedding => &acts.embedded,
            LayerId::Lstm1 => &acts.h1,
            LayerId::Lstm2 => &acts.h2,
            LayerId::Output => &acts.probs,
        }
    }
}

impl fmt::Display for LayerId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Pooling {
    /// Vector at the final real timestep.
    Last,
    /// Mean over real timesteps.
    Mean,
}

impl Pooling {
    pub fn as_str(self) -> &'static str {
        match self {
            Pooling::Last => "last",
            Pooling::Mean => "mean",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "last" => Some(Pooling::Last),
            "mean" => Some(Pooling::Mean),
            _ => None,
        }
    }
}

/// Pooling per layer. The default takes the last real timestep everywhere
/// except the embedding layer, which is mean-pooled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PoolingPlan {
    pub embedding: Pooling,
    pub lstm1: Pooling,
    pub lstm2: Pooling,
    pub output: Pooling,
}

impl Default for PoolingPlan {
    fn default() -> Self {
        Self { embedding: Pooling::Mean, ..Self::uniform(Pooling::Last) }
    }
}

impl PoolingPlan {
    pub fn uniform(p: Pooling) -> Self {
        Self { embedding: p, lstm1: p, lstm2: p, output: p }
    }

    pub fn for_layer(&self, layer: LayerId) -> Pooling {
        match layer {
            LayerId::Embedding => self.embedding,
            LayerId::Lstm1 => self.lstm1,
            LayerId::Lstm2 => self.lstm2,
            LayerId::Output => self.output,
        }
    }
}

pub fn sentence_representation(
    acts: &LayerActivations,
    mask: &[u8],
    layer: LayerId,
    pooling: Pooling,
) -> Result<Vec<f64>, ProbeError> {
    let rows = layer.rows(acts);
    let real: Vec<usize> = (0..mask.len().min(rows.rows())).filter(|&t| mask[t] == 1).collect();
    let Some(&last) = real.last() else {
        return Err(ProbeError::EmptySentence);
    };
    match pooling {
        Pooling::Last => Ok(rows.row(last).to_vec()),
        Pooling::Mean => {
            let mut out = vec![0.0; rows.cols()];
            for &t in &real {
                for (o, x) in out.iter_mut().zip(rows.row(t)) {
                    *o += x;
                }
            }
            let n = real.len() as f64;
            out.iter_mut().for_each(|o| *o /= n);
            Ok(out)
        }
    }
}

/// `N × D` representations for one layer, row-aligned with the corpus.
#[derive(Debug, Clone, PartialEq)]
pub struct ActivationTable {
    pub layer: LayerId,
    pub points: Matrix,
    pub labels: Vec<usize>,
    pub pooling: Pooling,
    pub checkpoint_sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct TableHeader {
    layer: LayerId,
    pooling: Pooling,
    rows: usize,
    cols: usize,
    labels: Vec<usize>,
    checkpoint_sha256: String,
}

/// Sidecar description of a stored table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableManifest {
    pub layer: LayerId,
    pub pooling: Pooling,
    pub n: usize,
    pub d: usize,
    pub label_histogram: BTreeMap<String, usize>,
    pub checkpoint_sha256: String,
}

impl ActivationTable {
    pub fn point_set(&self) -> Result<LabeledPointSet, GeometryError> {
        LabeledPointSet::new(self.points.clone(), self.labels.clone(), Construction::ALL.len())
    }

    pub fn manifest(&self) -> TableManifest {
        let mut label_histogram = BTreeMap::new();
        for &l in &self.labels {
            let name = Construction::from_label(l).map_or_else(|| l.to_string(), |c| c.as_str().to_string());
            *label_histogram.entry(name).or_insert(0) += 1;
        }
        TableManifest {
            layer: self.layer,
            pooling: self.pooling,
            n: self.points.rows(),
            d: self.points.cols(),
            label_histogram,
            checkpoint_sha256: self.checkpoint_sha256.clone(),
        }
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let header = TableHeader {
            layer: self.layer,
            pooling: self.pooling,
            rows: self.points.rows(),
            cols: self.points.cols(),
            labels: self.labels.clone(),
            checkpoint_sha256: self.checkpoint_sha256.clone(),
        };
        let json = serde_json::to_string(&header).expect("table header serializes");
        container::write(ACTIVATIONS_MAGIC, ACTIVATIONS_VERSION, &json, self.points.as_slice())
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, ProbeError> {
        let (json, payload) = container::read(bytes, ACTIVATIONS_MAGIC, ACTIVATIONS_VERSION)?;
        let h: TableHeader = serde_json::from_str(json).map_err(|e| ProbeError::Header(e.to_string()))?;
        if payload.len() != h.rows * h.cols || h.labels.len() != h.rows {
            return Err(ProbeError::Header(format!(
                "{}x{} table with {} labels cannot hold {} values",
                h.rows,
                h.cols,
                h.labels.len(),
                payload.len()
            )));
        }
        Ok(Self {
            layer: h.layer,
            points: Matrix::from_vec(h.rows, h.cols, payload),
            labels: h.labels,
            pooling: h.pooling,
            checkpoint_sha256: h.checkpoint_sha256,
        })
    }
}

/// Runs every sentence through the model and pools each layer. Rows are
/// processed in parallel and assembled in corpus order.
pub fn extract_all(
    params: &ModelParams,
    encoded: &EncodedCorpus,
    plan: &PoolingPlan,
    checkpoint_sha256: &str,
) -> Result<BTreeMap<LayerId, ActivationTable>, ProbeError> {
    let (model, corpus) = (params.config.vocab_size, encoded.vocab.len());
    if model != corpus {
        return Err(ProbeError::VocabMismatch { model, corpus });
    }
    let reps: Vec<[Vec<f64>; 4]> = (0..encoded.len())
        .into_par_iter()
        .map(|row| {
            let mask = encoded.mask_row(row);
            let acts = forward(params, encoded.tokens_row(row), mask).map_err(|source| ProbeError::Forward { row, source })?;
            let mut out: [Vec<f64>; 4] = Default::default();
            for (slot, layer) in out.iter_mut().zip(LayerId::ALL) {
                let v = sentence_representation(&acts, mask, layer, plan.for_layer(layer))?;
                if v.iter().any(|x| !x.is_finite()) {
                    return Err(ProbeError::NonFinite { row, layer });
                }
                *slot = v;
            }
            Ok(out)
        })
        .collect::<Result<_, ProbeError>>()?;

    let n = encoded.len();
    let mut tables = BTreeMap::new();
    for (k, layer) in LayerId::ALL.into_iter().enumerate() {
        let d = layer.width(params);
        let mut data = Vec::with_capacity(n * d);
        for r in &reps {
            data.extend_from_slice(&r[k]);
        }
        tables.insert(
            layer,
            ActivationTable {
                layer,
                points: Matrix::from_vec(n, d, data),
                labels: encoded.labels.clone(),
                pooling: plan.for_layer(layer),
                checkpoint_sha256: checkpoint_sha256.to_string(),
            },
        );
    }
    Ok(tables)
}
