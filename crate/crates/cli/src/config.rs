//! Run configuration. Values come from built-in defaults, then an optional
//! TOML or JSON file, then command-line flags.

use std::path::{Path, PathBuf};

use ascprobe_core::corpus::PaddingSide;
use ascprobe_core::geometry::TsneConfig;
use ascprobe_core::probe::{Pooling, PoolingPlan};
use ascprobe_core::rnn::{ModelConfig, OptimizerKind, TrainConfig};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum MethodChoice {
    Mds,
    Tsne,
    #[default]
    Both,
}

impl MethodChoice {
    pub fn mds(self) -> bool {
        matches!(self, MethodChoice::Mds | MethodChoice::Both)
    }

    pub fn tsne(self) -> bool {
        matches!(self, MethodChoice::Tsne | MethodChoice::Both)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CorpusSection {
    pub n_per_class: usize,
    /// Custom grammar file; the built-in grammar when absent.
    pub grammar: Option<PathBuf>,
    pub train_fraction: f64,
    pub padding: PaddingSide,
}

impl Default for CorpusSection {
    fn default() -> Self {
        Self { n_per_class: 500, grammar: None, train_fraction: 0.9, padding: PaddingSide::Post }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelSection {
    pub embedding_dim: usize,
    pub hidden_dim_1: usize,
    pub hidden_dim_2: usize,
    pub init_scale: f64,
}

impl Default for ModelSection {
    fn default() -> Self {
        let m = ModelConfig::new(0, 0);
        Self {
            embedding_dim: m.embedding_dim,
            hidden_dim_1: m.hidden_dim_1,
            hidden_dim_2: m.hidden_dim_2,
            init_scale: m.init_scale,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainSection {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub optimizer: OptimizerKind,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub clip_norm: f64,
}

impl Default for TrainSection {
    fn default() -> Self {
        let t = TrainConfig::default();
        Self {
            epochs: t.epochs,
            batch_size: t.batch_size,
            learning_rate: t.learning_rate,
            optimizer: t.optimizer,
            beta1: t.beta1,
            beta2: t.beta2,
            epsilon: t.epsilon,
            clip_norm: t.clip_norm,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalysisSection {
    /// Pooling for the two LSTM layers and the output layer.
    pub pooling: Pooling,
    pub embedding_pooling: Pooling,
    pub method: MethodChoice,
    pub perplexity: f64,
    pub tsne_iterations: usize,
    /// Z-score activations before computing MDS distances.
    pub mds_zscore: bool,
    /// Also store the pooled activation tables.
    pub save_activations: bool,
}

impl Default for AnalysisSection {
    fn default() -> Self {
        let plan = PoolingPlan::default();
        Self {
            pooling: plan.lstm2,
            embedding_pooling: plan.embedding,
            method: MethodChoice::Both,
            perplexity: 100.0,
            tsne_iterations: TsneConfig::default().iterations,
            mds_zscore: false,
            save_activations: false,
        }
    }
}

/// Every knob of a run. One master seed drives corpus sampling, the split,
/// weight initialization, batch shuffling and t-SNE initialization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub corpus: CorpusSection,
    pub model: ModelSection,
    pub train: TrainSection,
    pub analysis: AnalysisSection,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 1,
            corpus: CorpusSection::default(),
            model: ModelSection::default(),
            train: TrainSection::default(),
            analysis: AnalysisSection::default(),
        }
    }
}

/// Flag values; `None` leaves the file or default value in place.
#[derive(Debug, Clone, Default, clap::Args)]
pub struct Overrides {
    /// Master seed for every random stage.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Sentences generated per construction.
    #[arg(long)]
    pub n_per_class: Option<usize>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub batch_size: Option<usize>,
    #[arg(long)]
    pub lr: Option<f64>,
    /// Pooling for the LSTM and output layers: last or mean.
    #[arg(long, value_parser = parse_pooling)]
    pub pooling: Option<Pooling>,
    /// Pooling for the embedding layer: last or mean.
    #[arg(long, value_parser = parse_pooling)]
    pub embedding_pooling: Option<Pooling>,
    #[arg(long)]
    pub perplexity: Option<f64>,
    #[arg(long, value_enum)]
    pub method: Option<MethodChoice>,
    /// TOML or JSON config file.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

fn parse_pooling(s: &str) -> Result<Pooling, String> {
    Pooling::parse(s).ok_or_else(|| format!("expected last or mean, got {s:?}"))
}

impl RunConfig {
    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let parsed = if path.extension().is_some_and(|e| e == "json") {
            serde_json::from_str(&text).map_err(|e| e.to_string())
        } else {
            toml::from_str(&text).map_err(|e| e.to_string())
        };
        parsed.map_err(|e| CliError::Domain(format!("{}: {e}", path.display())))
    }

    /// Defaults, then the config file named in `o`, then the flags.
    pub fn resolve(o: &Overrides) -> Result<Self, CliError> {
        let mut cfg = match &o.config {
            Some(path) => Self::from_file(path)?,
            None => Self::default(),
        };
        cfg.apply(o);
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(v) = o.seed {
            self.seed = v;
        }
        if let Some(v) = o.n_per_class {
            self.corpus.n_per_class = v;
        }
        if let Some(v) = o.epochs {
            self.train.epochs = v;
        }
        if let Some(v) = o.batch_size {
            self.train.batch_size = v;
        }
        if let Some(v) = o.lr {
            self.train.learning_rate = v;
        }
        if let Some(v) = o.pooling {
            self.analysis.pooling = v;
        }
        if let Some(v) = o.embedding_pooling {
            self.analysis.embedding_pooling = v;
        }
        if let Some(v) = o.perplexity {
            self.analysis.perplexity = v;
        }
        if let Some(v) = o.method {
            self.analysis.method = v;
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        self.train_config().validate().map_err(|e| CliError::Domain(e.to_string()))?;
        if !(self.analysis.perplexity > 1.0) {
            return Err(CliError::Domain(format!("perplexity must exceed 1, got {}", self.analysis.perplexity)));
        }
        if self.analysis.tsne_iterations == 0 {
            return Err(CliError::Domain("tsne_iterations must be positive".into()));
        }
        Ok(())
    }

    pub fn train_config(&self) -> TrainConfig {
        let t = &self.train;
        TrainConfig {
            epochs: t.epochs,
            batch_size: t.batch_size,
            learning_rate: t.learning_rate,
            optimizer: t.optimizer,
            beta1: t.beta1,
            beta2: t.beta2,
            epsilon: t.epsilon,
            clip_norm: t.clip_norm,
            shuffle_seed: self.seed,
        }
    }

    pub fn pooling_plan(&self) -> PoolingPlan {
        PoolingPlan { embedding: self.analysis.embedding_pooling, ..PoolingPlan::uniform(self.analysis.pooling) }
    }

    pub fn tsne_config(&self) -> TsneConfig {
        TsneConfig {
            perplexity: self.analysis.perplexity,
            iterations: self.analysis.tsne_iterations,
            seed: self.seed,
            ..TsneConfig::default()
        }
    }
}
