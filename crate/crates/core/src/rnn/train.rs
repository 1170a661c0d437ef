use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::model::{forward, has_target, loss_and_gradients, PROB_FLOOR};
use super::params::{Gradients, ModelParams};
use super::RnnError;
use crate::corpus::EncodedCorpus;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OptimizerKind {
    Sgd,
    Adam,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub optimizer: OptimizerKind,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub clip_norm: f64,
    pub shuffle_seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 30,
            batch_size: 32,
            learning_rate: 1e-3,
            optimizer: OptimizerKind::Adam,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            clip_norm: 5.0,
            shuffle_seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), RnnError> {
        let bad = |m: &str| Err(RnnError::InvalidConfig(m.to_string()));
        if self.epochs == 0 {
            return bad("epochs must be at least 1");
        }
        if self.batch_size == 0 {
            return bad("batch_size must be at least 1");
        }
        // Zero is accepted as a no-op step; negative rates are not.
        if !(self.learning_rate >= 0.0 && self.learning_rate.is_finite()) {
            return bad("learning_rate must be non-negative and finite");
        }
        if !(self.clip_norm > 0.0) {
            return bad("clip_norm must be positive");
        }
        Ok(())
    }
}

struct Adam {
    m: Gradients,
    v: Gradients,
    step: i32,
}

enum Optimizer {
    Sgd,
    Adam(Box<Adam>),
}

impl Optimizer {
    fn new(cfg: &TrainConfig, params: &ModelParams) -> Self {
        match cfg.optimizer {
            OptimizerKind::Sgd => Optimizer::Sgd,
            OptimizerKind::Adam => Optimizer::Adam(Box::new(Adam {
                m: params.zero_gradients(),
                v: params.zero_gradients(),
                step: 0,
            })),
        }
    }

    fn apply(&mut self, cfg: &TrainConfig, params: &mut ModelParams, grads: &Gradients) {
        let lr = cfg.learning_rate;
        match self {
            Optimizer::Sgd => {
                for (p, (_, g)) in params.tensors_mut().into_iter().zip(grads.tensors()) {
                    for (pv, gv) in p.iter_mut().zip(g) {
                        *pv -= lr * gv;
                    }
                }
            }
            Optimizer::Adam(state) => {
                state.step += 1;
                let bc1 = 1.0 - cfg.beta1.powi(state.step);
                let bc2 = 1.0 - cfg.beta2.powi(state.step);
                let Adam { m, v, .. } = state.as_mut();
                let tensors = params.tensors_mut().into_iter().zip(m.tensors_mut()).zip(v.tensors_mut());
                for (((p, m), v), (_, g)) in tensors.zip(grads.tensors()) {
                    for k in 0..p.len() {
                        m[k] = cfg.beta1 * m[k] + (1.0 - cfg.beta1) * g[k];
                        v[k] = cfg.beta2 * v[k] + (1.0 - cfg.beta2) * g[k] * g[k];
                        let m_hat = m[k] / bc1;
                        let v_hat = v[k] / bc2;
                        p[k] -= lr * m_hat / (v_hat.sqrt() + cfg.epsilon);
                    }
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_loss: f64,
    pub val_loss: Option<f64>,
    pub val_accuracy: Option<f64>,
}

/// Trains with shuffled mini-batches and global-norm clipping. Returns the
/// trained parameters and the target-weighted mean training loss per epoch.
pub fn train(
    params: ModelParams,
    data: &EncodedCorpus,
    cfg: &TrainConfig,
) -> Result<(ModelParams, Vec<f64>), RnnError> {
    let (params, history) = train_with_validation(params, data, None, cfg, |_| {})?;
    Ok((params, history.into_iter().map(|r| r.train_loss).collect()))
}

/// [`train`] plus optional per-epoch validation. `on_epoch` sees each record
/// as soon as the epoch finishes.
pub fn train_with_validation(
    mut params: ModelParams,
    data: &EncodedCorpus,
    val: Option<&EncodedCorpus>,
    cfg: &TrainConfig,
    mut on_epoch: impl FnMut(&EpochRecord),
) -> Result<(ModelParams, Vec<EpochRecord>), RnnError> {
    cfg.validate()?;
    params.config.validate()?;
    if data.is_empty() {
        return Err(RnnError::EmptyCorpus);
    }
    if data.vocab.len() != params.config.vocab_size {
        return Err(RnnError::VocabMismatch { model: params.config.vocab_size, corpus: data.vocab.len() });
    }
    let mut optimizer = Optimizer::new(cfg, &params);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.shuffle_seed);
    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut history = Vec::with_capacity(cfg.epochs);

    for epoch in 0..cfg.epochs {
        order.shuffle(&mut rng);
        let mut loss_sum = 0.0;
        let mut target_sum = 0usize;
        for (batch_idx, rows) in order.chunks(cfg.batch_size).enumerate() {
            let (batch_loss, mut grads, count) = loss_and_gradients(&params, data, rows)?;
            if count == 0 {
                continue;
            }
            let norm = grads.global_norm();
            if !batch_loss.is_finite() || !norm.is_finite() {
                return Err(RnnError::NonFiniteLoss { epoch, batch: batch_idx });
            }
            if norm > cfg.clip_norm {
                grads.scale(cfg.clip_norm / norm);
            }
            optimizer.apply(cfg, &mut params, &grads);
            loss_sum += batch_loss * count as f64;
            target_sum += count;
        }
        let train_loss = if target_sum == 0 { 0.0 } else { loss_sum / target_sum as f64 };
        let (val_loss, val_accuracy) = match val {
            Some(v) if !v.is_empty() => {
                let ev = evaluate(&params, v)?;
                (Some(ev.loss), Some(ev.accuracy))
            }
            _ => (None, None),
        };
        let record = EpochRecord { epoch: epoch + 1, train_loss, val_loss, val_accuracy };
        log::info!(
            "epoch {:>3}  train_loss {:.4}  val_loss {}  val_acc {}",
            record.epoch,
            train_loss,
            val_loss.map_or("-".into(), |v| format!("{v:.4}")),
            val_accuracy.map_or("-".into(), |v| format!("{v:.4}")),
        );
        on_epoch(&record);
        history.push(record);
    }
    Ok((params, history))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    /// Fraction of targets where the most probable word is the target.
    pub accuracy: f64,
    /// `exp(loss)`.
    pub perplexity: f64,
    /// Mean masked cross-entropy.
    pub loss: f64,
    pub targets: usize,
}

pub fn evaluate(params: &ModelParams, data: &EncodedCorpus) -> Result<Evaluation, RnnError> {
    let per_row: Vec<(f64, usize, usize)> = (0..data.len())
        .into_par_iter()
        .map(|r| {
            let (tokens, mask) = (data.tokens_row(r), data.mask_row(r));
            let acts = forward(params, tokens, mask)?;
            let mut sum = 0.0;
            let mut correct = 0;
            let mut count = 0;
            for t in 0..tokens.len() {
                if !has_target(mask, t) {
                    continue;
                }
                let target = tokens[t + 1] as usize;
                let p = acts.probs.row(t);
                sum -= p[target].max(PROB_FLOOR).ln();
                let argmax = p
                    .iter()
                    .enumerate()
                    .fold((0, f64::NEG_INFINITY), |best, (k, &x)| if x > best.1 { (k, x) } else { best })
                    .0;
                correct += usize::from(argmax == target);
                count += 1;
            }
            Ok((sum, correct, count))
        })
        .collect::<Result<_, RnnError>>()?;
    let (sum, correct, count) =
        per_row.iter().fold((0.0, 0, 0), |(s, c, n), &(ds, dc, dn)| (s + ds, c + dc, n + dn));
    if count == 0 {
        return Ok(Evaluation { accuracy: 0.0, perplexity: 1.0, loss: 0.0, targets: 0 });
    }
    let loss = sum / count as f64;
    Ok(Evaluation { accuracy: correct as f64 / count as f64, perplexity: loss.exp(), loss, targets: count })
}
