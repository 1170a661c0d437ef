//! Forward pass, masked next-word loss and backpropagation through time.

use rayon::prelude::*;

use super::cell::{step_backward, step_into, StepGrads};
use super::params::{Gradients, ModelParams};
use super::RnnError;
use crate::corpus::EncodedCorpus;
use crate::Matrix;

/// Lower bound applied to target probabilities before taking the log.
pub const PROB_FLOOR: f64 = 1e-12;

/// Per-timestep activations of every layer, plus the gate values needed by
/// the backward pass. Each matrix has one row per timestep.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerActivations {
    /// `T × E`; padded steps hold the PAD row of the embedding.
    pub embedded: Matrix,
    pub h1: Matrix,
    pub c1: Matrix,
    pub h2: Matrix,
    pub c2: Matrix,
    /// `T × V` next-word distributions.
    pub probs: Matrix,
    /// `T × 4H1` activated gates, zero on padded steps.
    pub gates1: Matrix,
    pub gates2: Matrix,
}

impl LayerActivations {
    pub fn len(&self) -> usize {
        self.probs.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

fn softmax_into(logits: &[f64], out: &mut [f64]) {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0;
    for (o, &l) in out.iter_mut().zip(logits) {
        *o = (l - max).exp();
        sum += *o;
    }
    for o in out.iter_mut() {
        *o /= sum;
    }
}

/// Runs one padded row. Hidden and cell states start at zero and are held
/// fixed across padded steps.
pub fn forward(params: &ModelParams, tokens: &[u32], mask: &[u8]) -> Result<LayerActivations, RnnError> {
    if tokens.len() != mask.len() {
        return Err(RnnError::ShapeMismatch(format!(
            "token row has {} entries, mask row {}",
            tokens.len(),
            mask.len()
        )));
    }
    let cfg = &params.config;
    let (v, e, h1d, h2d) = (cfg.vocab_size, cfg.embedding_dim, cfg.hidden_dim_1, cfg.hidden_dim_2);
    if let Some(&bad) = tokens.iter().find(|&&id| id as usize >= v) {
        return Err(RnnError::TokenOutOfRange { id: bad, vocab_size: v });
    }
    let t_len = tokens.len();
    let mut acts = LayerActivations {
        embedded: Matrix::zeros(t_len, e),
        h1: Matrix::zeros(t_len, h1d),
        c1: Matrix::zeros(t_len, h1d),
        h2: Matrix::zeros(t_len, h2d),
        c2: Matrix::zeros(t_len, h2d),
        probs: Matrix::zeros(t_len, v),
        gates1: Matrix::zeros(t_len, 4 * h1d),
        gates2: Matrix::zeros(t_len, 4 * h2d),
    };
    let mut h1_prev = vec![0.0; h1d];
    let mut c1_prev = vec![0.0; h1d];
    let mut h2_prev = vec![0.0; h2d];
    let mut c2_prev = vec![0.0; h2d];
    let mut logits = vec![0.0; v];

    for t in 0..t_len {
        let tok = tokens[t] as usize;
        acts.embedded.row_mut(t).copy_from_slice(&params.embedding[tok * e..(tok + 1) * e]);
        if mask[t] == 1 {
            let x = acts.embedded.row(t).to_vec();
            let (mut h, mut c) = (vec![0.0; h1d], vec![0.0; h1d]);
            step_into(&params.lstm1, &x, &h1_prev, &c1_prev, acts.gates1.row_mut(t), &mut h, &mut c);
            h1_prev = h;
            c1_prev = c;
            let (mut h, mut c) = (vec![0.0; h2d], vec![0.0; h2d]);
            step_into(&params.lstm2, &h1_prev, &h2_prev, &c2_prev, acts.gates2.row_mut(t), &mut h, &mut c);
            h2_prev = h;
            c2_prev = c;
        }
        acts.h1.row_mut(t).copy_from_slice(&h1_prev);
        acts.c1.row_mut(t).copy_from_slice(&c1_prev);
        acts.h2.row_mut(t).copy_from_slice(&h2_prev);
        acts.c2.row_mut(t).copy_from_slice(&c2_prev);

        logits.copy_from_slice(&params.out_b);
        for (k, &hk) in h2_prev.iter().enumerate() {
            let w_row = &params.out_w[k * v..(k + 1) * v];
            for (l, &w) in logits.iter_mut().zip(w_row) {
                *l += hk * w;
            }
        }
        softmax_into(&logits, acts.probs.row_mut(t));
    }
    Ok(acts)
}

/// Whether position `t` carries a next-word target: both the input at `t`
/// and the target at `t + 1` are real tokens.
#[inline]
pub fn has_target(mask: &[u8], t: usize) -> bool {
    t + 1 < mask.len() && mask[t] == 1 && mask[t + 1] == 1
}

pub fn target_count(mask: &[u8]) -> usize {
    (0..mask.len()).filter(|&t| has_target(mask, t)).count()
}

/// Summed cross-entropy of one row and the number of targets it contains.
pub fn sequence_loss(acts: &LayerActivations, tokens: &[u32], mask: &[u8]) -> (f64, usize) {
    let mut sum = 0.0;
    let mut count = 0;
    for t in 0..tokens.len() {
        if has_target(mask, t) {
            let p = acts.probs[(t, tokens[t + 1] as usize)];
            sum -= p.max(PROB_FLOOR).ln();
            count += 1;
        }
    }
    (sum, count)
}

/// Mean cross-entropy over every real target in the batch. Rows without
/// targets contribute nothing; an empty batch has loss 0.
pub fn loss(acts: &[LayerActivations], tokens: &[&[u32]], masks: &[&[u8]]) -> f64 {
    let (sum, count) = acts
        .iter()
        .zip(tokens.iter().zip(masks))
        .map(|(a, (t, m))| sequence_loss(a, t, m))
        .fold((0.0, 0usize), |(s, c), (ds, dc)| (s + ds, c + dc));
    if count == 0 {
        0.0
    } else {
        sum / count as f64
    }
}

/// Accumulates `scale · ∂(summed row loss)` into `grads`.
pub fn backward_row(
    params: &ModelParams,
    tokens: &[u32],
    mask: &[u8],
    acts: &LayerActivations,
    scale: f64,
    grads: &mut Gradients,
) {
    let cfg = &params.config;
    let (v, e, h1d, h2d) = (cfg.vocab_size, cfg.embedding_dim, cfg.hidden_dim_1, cfg.hidden_dim_2);
    let t_len = tokens.len();

    let mut dh2_next = vec![0.0; h2d];
    let mut dc2 = vec![0.0; h2d];
    let mut dh1_next = vec![0.0; h1d];
    let mut dc1 = vec![0.0; h1d];
    let mut dh2 = vec![0.0; h2d];
    let mut dh1 = vec![0.0; h1d];
    let mut dlogits = vec![0.0; v];
    let mut dz2 = vec![0.0; 4 * h2d];
    let mut dz1 = vec![0.0; 4 * h1d];
    let mut dx2 = vec![0.0; h1d];
    let mut dx1 = vec![0.0; e];
    let zeros1 = vec![0.0; h1d];
    let zeros2 = vec![0.0; h2d];

    for t in (0..t_len).rev() {
        dh2.copy_from_slice(&dh2_next);
        if has_target(mask, t) {
            let target = tokens[t + 1] as usize;
            let p = acts.probs.row(t);
            if p[target] >= PROB_FLOOR {
                for (d, &pv) in dlogits.iter_mut().zip(p) {
                    *d = scale * pv;
                }
                dlogits[target] -= scale;
                let h2_t = acts.h2.row(t);
                for (b, d) in grads.out_b.iter_mut().zip(&dlogits) {
                    *b += d;
                }
                for k in 0..h2d {
                    let w_row = &params.out_w[k * v..(k + 1) * v];
                    let dw_row = &mut grads.out_w[k * v..(k + 1) * v];
                    let hk = h2_t[k];
                    let mut acc = 0.0;
                    for l in 0..v {
                        dw_row[l] += hk * dlogits[l];
                        acc += w_row[l] * dlogits[l];
                    }
                    dh2[k] += acc;
                }
            }
        }
        if mask[t] == 0 {
            // Frozen step: h and c are copies of the previous step's values.
            dh2_next.copy_from_slice(&dh2);
            continue;
        }
        let (h2_prev, c2_prev, h1_prev, c1_prev) = if t == 0 {
            (&zeros2[..], &zeros2[..], &zeros1[..], &zeros1[..])
        } else {
            (acts.h2.row(t - 1), acts.c2.row(t - 1), acts.h1.row(t - 1), acts.c1.row(t - 1))
        };
        step_backward(
            &params.lstm2,
            acts.gates2.row(t),
            acts.c2.row(t),
            c2_prev,
            acts.h1.row(t),
            h2_prev,
            &dh2,
            &mut dc2,
            &mut dz2,
            &mut dx2,
            &mut dh2_next,
            StepGrads { dw: &mut grads.lstm2.w, du: &mut grads.lstm2.u, db: &mut grads.lstm2.b },
        );
        for ((d, n), x) in dh1.iter_mut().zip(&dh1_next).zip(&dx2) {
            *d = n + x;
        }
        step_backward(
            &params.lstm1,
            acts.gates1.row(t),
            acts.c1.row(t),
            c1_prev,
            acts.embedded.row(t),
            h1_prev,
            &dh1,
            &mut dc1,
            &mut dz1,
            &mut dx1,
            &mut dh1_next,
            StepGrads { dw: &mut grads.lstm1.w, du: &mut grads.lstm1.u, db: &mut grads.lstm1.b },
        );
        let tok = tokens[t] as usize;
        for (g, d) in grads.embedding[tok * e..(tok + 1) * e].iter_mut().zip(&dx1) {
            *g += d;
        }
    }
}

/// Exact gradient of the batch mean loss given stored forward passes.
///
/// Rows are processed in parallel and summed in row order, so the result is
/// independent of thread count.
pub fn backward(params: &ModelParams, tokens: &[&[u32]], masks: &[&[u8]], acts: &[LayerActivations]) -> Gradients {
    let count: usize = masks.iter().map(|m| target_count(m)).sum();
    if count == 0 {
        return params.zero_gradients();
    }
    let scale = 1.0 / count as f64;
    let partials: Vec<Gradients> = (0..acts.len())
        .into_par_iter()
        .map(|i| {
            let mut g = params.zero_gradients();
            backward_row(params, tokens[i], masks[i], &acts[i], scale, &mut g);
            g
        })
        .collect();
    sum_in_order(params, partials)
}

fn sum_in_order(params: &ModelParams, partials: Vec<Gradients>) -> Gradients {
    let mut iter = partials.into_iter();
    let mut total = iter.next().unwrap_or_else(|| params.zero_gradients());
    for g in iter {
        total.add_assign(&g);
    }
    total
}

/// Rows handled sequentially by one task; fixed so that the reduction order
/// never depends on the thread pool.
const ROWS_PER_TASK: usize = 4;

/// Forward and backward over `rows` of `data`. Returns the batch mean loss,
/// its gradient and the number of targets.
pub fn loss_and_gradients(
    params: &ModelParams,
    data: &EncodedCorpus,
    rows: &[usize],
) -> Result<(f64, Gradients, usize), RnnError> {
    let count: usize = rows.iter().map(|&r| target_count(data.mask_row(r))).sum();
    if count == 0 {
        return Ok((0.0, params.zero_gradients(), 0));
    }
    let scale = 1.0 / count as f64;
    let partials: Vec<(f64, Gradients)> = rows
        .par_chunks(ROWS_PER_TASK)
        .map(|chunk| {
            let mut g = params.zero_gradients();
            let mut sum = 0.0;
            for &r in chunk {
                let (tokens, mask) = (data.tokens_row(r), data.mask_row(r));
                let acts = forward(params, tokens, mask)?;
                sum += sequence_loss(&acts, tokens, mask).0;
                backward_row(params, tokens, mask, &acts, scale, &mut g);
            }
            Ok((sum, g))
        })
        .collect::<Result<_, RnnError>>()?;
    let total_loss: f64 = partials.iter().map(|(s, _)| s).sum();
    let grads = sum_in_order(params, partials.into_iter().map(|(_, g)| g).collect());
    Ok((total_loss / count as f64, grads, count))
}
