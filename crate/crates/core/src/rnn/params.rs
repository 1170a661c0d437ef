use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Uniform};
use serde::{Deserialize, Serialize};

use super::RnnError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub vocab_size: usize,
    pub embedding_dim: usize,
    pub hidden_dim_1: usize,
    pub hidden_dim_2: usize,
    pub max_seq_len: usize,
    pub init_scale: f64,
    pub rng_seed: u64,
}

impl ModelConfig {
    /// Default architecture (E=32, H1=H2=64, init scale 0.2) for a given
    /// vocabulary and width.
    pub fn new(vocab_size: usize, max_seq_len: usize) -> Self {
        Self {
            vocab_size,
            embedding_dim: 32,
            hidden_dim_1: 64,
            hidden_dim_2: 64,
            max_seq_len,
            init_scale: 0.2,
            rng_seed: 0,
        }
    }

    pub fn validate(&self) -> Result<(), RnnError> {
        let bad = |m: &str| Err(RnnError::InvalidConfig(m.to_string()));
        if self.vocab_size < 3 {
            return bad("vocab_size must be at least 3");
        }
        if self.embedding_dim == 0 || self.hidden_dim_1 == 0 || self.hidden_dim_2 == 0 {
            return bad("layer widths must be positive");
        }
        if !(self.init_scale > 0.0 && self.init_scale.is_finite()) {
            return bad("init_scale must be positive and finite");
        }
        Ok(())
    }
}

/// One LSTM layer. Gate blocks are stacked in the order input, forget,
/// output, candidate: row `k*H + j` of `w`, `u` and `b` belongs to gate `k`,
/// unit `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct LstmParams {
    pub input_dim: usize,
    pub hidden_dim: usize,
    /// `4H × input_dim`
    pub w: Vec<f64>,
    /// `4H × H`
    pub u: Vec<f64>,
    /// `4H`
    pub b: Vec<f64>,
}

impl LstmParams {
    pub fn zeros(input_dim: usize, hidden_dim: usize) -> Self {
        Self {
            input_dim,
            hidden_dim,
            w: vec![0.0; 4 * hidden_dim * input_dim],
            u: vec![0.0; 4 * hidden_dim * hidden_dim],
            b: vec![0.0; 4 * hidden_dim],
        }
    }
}

pub const GATE_INPUT: usize = 0;
pub const GATE_FORGET: usize = 1;
pub const GATE_OUTPUT: usize = 2;
pub const GATE_CANDIDATE: usize = 3;

/// All trainable tensors plus the architecture they were built for.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    pub config: ModelConfig,
    /// `V × E`
    pub embedding: Vec<f64>,
    pub lstm1: LstmParams,
    pub lstm2: LstmParams,
    /// `H2 × V`
    pub out_w: Vec<f64>,
    /// `V`
    pub out_b: Vec<f64>,
}

/// Gradient (or optimizer moment) tensors shaped like [`ModelParams`].
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub embedding: Vec<f64>,
    pub lstm1: LstmParams,
    pub lstm2: LstmParams,
    pub out_w: Vec<f64>,
    pub out_b: Vec<f64>,
}

macro_rules! tensor_views {
    () => {
        /// Tensors in canonical order, paired with their names.
        pub fn tensors(&self) -> [(&'static str, &[f64]); 9] {
            [
                ("embedding", &self.embedding),
                ("lstm1.w", &self.lstm1.w),
                ("lstm1.u", &self.lstm1.u),
                ("lstm1.b", &self.lstm1.b),
                ("lstm2.w", &self.lstm2.w),
                ("lstm2.u", &self.lstm2.u),
                ("lstm2.b", &self.lstm2.b),
                ("output.w", &self.out_w),
                ("output.b", &self.out_b),
            ]
        }

        pub fn tensors_mut(&mut self) -> [&mut Vec<f64>; 9] {
            [
                &mut self.embedding,
                &mut self.lstm1.w,
                &mut self.lstm1.u,
                &mut self.lstm1.b,
                &mut self.lstm2.w,
                &mut self.lstm2.u,
                &mut self.lstm2.b,
                &mut self.out_w,
                &mut self.out_b,
            ]
        }

        pub fn num_scalars(&self) -> usize {
            self.tensors().iter().map(|(_, t)| t.len()).sum()
        }
    };
}

impl ModelParams {
    tensor_views!();

    /// Shapes of the tensors in [`ModelParams::tensors`] order.
    pub fn shapes(config: &ModelConfig) -> [Vec<usize>; 9] {
        let (v, e, h1, h2) =
            (config.vocab_size, config.embedding_dim, config.hidden_dim_1, config.hidden_dim_2);
        [
            vec![v, e],
            vec![4 * h1, e],
            vec![4 * h1, h1],
            vec![4 * h1],
            vec![4 * h2, h1],
            vec![4 * h2, h2],
            vec![4 * h2],
            vec![h2, v],
            vec![v],
        ]
    }

    pub fn zeros(config: ModelConfig) -> Self {
        let (v, e, h1, h2) =
            (config.vocab_size, config.embedding_dim, config.hidden_dim_1, config.hidden_dim_2);
        Self {
            embedding: vec![0.0; v * e],
            lstm1: LstmParams::zeros(e, h1),
            lstm2: LstmParams::zeros(h1, h2),
            out_w: vec![0.0; h2 * v],
            out_b: vec![0.0; v],
            config,
        }
    }

    pub fn zero_gradients(&self) -> Gradients {
        let z = ModelParams::zeros(self.config.clone());
        Gradients { embedding: z.embedding, lstm1: z.lstm1, lstm2: z.lstm2, out_w: z.out_w, out_b: z.out_b }
    }

    pub fn is_finite(&self) -> bool {
        self.tensors().iter().all(|(_, t)| t.iter().all(|v| v.is_finite()))
    }
}

impl Gradients {
    tensor_views!();

    pub fn add_assign(&mut self, other: &Gradients) {
        for (dst, (_, src)) in self.tensors_mut().into_iter().zip(other.tensors()) {
            for (d, s) in dst.iter_mut().zip(src) {
                *d += s;
            }
        }
    }

    pub fn scale(&mut self, factor: f64) {
        for t in self.tensors_mut() {
            for v in t.iter_mut() {
                *v *= factor;
            }
        }
    }

    pub fn global_norm(&self) -> f64 {
        self.tensors().iter().flat_map(|(_, t)| t.iter()).map(|v| v * v).sum::<f64>().sqrt()
    }
}

/// Uniform `[-init_scale, init_scale]` weights from a seeded stream; forget
/// gate biases start at 1, every other bias at 0.
pub fn init_params(config: &ModelConfig) -> Result<ModelParams, RnnError> {
    config.validate()?;
    let mut params = ModelParams::zeros(config.clone());
    let mut rng = ChaCha8Rng::seed_from_u64(config.rng_seed);
    let dist = Uniform::new_inclusive(-config.init_scale, config.init_scale)
        .map_err(|e| RnnError::InvalidConfig(e.to_string()))?;
    {
        let ModelParams { embedding, lstm1, lstm2, out_w, .. } = &mut params;
        for tensor in [embedding, &mut lstm1.w, &mut lstm1.u, &mut lstm2.w, &mut lstm2.u, out_w] {
            for v in tensor.iter_mut() {
                *v = dist.sample(&mut rng);
            }
        }
    }
    for layer in [&mut params.lstm1, &mut params.lstm2] {
        let h = layer.hidden_dim;
        layer.b[GATE_FORGET * h..(GATE_FORGET + 1) * h].fill(1.0);
    }
    Ok(params)
}
