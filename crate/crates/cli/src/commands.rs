//! The pipeline stages behind each subcommand. Every stage reads and writes
//! a run directory and keeps its `manifest.json` current.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use ascprobe_core::corpus::{
    build_vocab, encode_with, generate_corpus, split, Construction, Corpus, CorpusError, GrammarSpec, Vocabulary,
};
use ascprobe_core::geometry::{
    classical_mds, gdv, pairwise_distances, tsne, zscore_half, ProjectionDiagnostics, ProjectionMethod,
};
use ascprobe_core::probe::{extract_all, LayerId, PoolingPlan};
use ascprobe_core::rnn::{
    checkpoint_bytes, evaluate, init_params, load_checkpoint, train_with_validation, EpochRecord, ModelConfig,
    RnnError,
};
use ascprobe_core::{sha256_hex, Matrix};
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::error::CliError;
use crate::manifest::{now, RunManifest, MANIFEST_FILE};
use crate::svg;

pub const CORPUS_FILE: &str = "corpus.jsonl";
pub const VOCAB_FILE: &str = "vocab.json";
pub const GRAMMAR_FILE: &str = "grammar.json";
pub const CHECKPOINT_FILE: &str = "model.ckpt";
pub const TRAIN_LOG_FILE: &str = "train_log.csv";
pub const GDV_FILE: &str = "gdv.json";
pub const SUMMARY_FILE: &str = "summary.json";

pub fn projection_stem(layer: LayerId, method: ProjectionMethod) -> String {
    format!("projections/{}_{}", layer.as_str(), method.as_str())
}

fn read_file(path: &Path) -> Result<Vec<u8>, CliError> {
    std::fs::read(path).map_err(|e| CliError::io(path, e))
}

fn write_artifact(dir: &Path, rel: &str, bytes: &[u8], manifest: &mut RunManifest) -> Result<(), CliError> {
    let path = dir.join(rel);
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent).map_err(|e| CliError::io(parent, e))?;
    }
    std::fs::write(&path, bytes).map_err(|e| CliError::io(&path, e))?;
    manifest.record_artifact(rel, sha256_hex(bytes));
    Ok(())
}

fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

/// Opens the manifest in `out`, or starts one from `cfg`. The stored
/// configuration is replaced by `cfg` either way.
pub fn open_manifest(out: &Path, cfg: &RunConfig) -> Result<RunManifest, CliError> {
    let mut m = RunManifest::existing(out)?.unwrap_or_else(|| RunManifest::new(cfg.clone()));
    m.config = cfg.clone();
    Ok(m)
}

fn corpus_error(e: CorpusError) -> CliError {
    match e {
        CorpusError::Io(source) => CliError::Io { path: PathBuf::from("<corpus>"), source },
        other => CliError::domain(other),
    }
}

// ---------------------------------------------------------------- generate

#[derive(Debug, Clone, Serialize)]
pub struct GenerateOutcome {
    pub sentences: usize,
    pub class_counts: BTreeMap<String, usize>,
    pub vocab_size: usize,
    pub corpus_sha256: String,
}

fn load_grammar(cfg: &RunConfig) -> Result<(GrammarSpec, Option<String>), CliError> {
    match &cfg.corpus.grammar {
        None => Ok((GrammarSpec::default(), None)),
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
            let spec = GrammarSpec::from_json(&text).map_err(|e| CliError::Domain(format!("{}: {e}", path.display())))?;
            Ok((spec, Some(text)))
        }
    }
}

fn class_histogram(counts: [usize; 4]) -> BTreeMap<String, usize> {
    Construction::ALL.iter().map(|c| (c.as_str().to_string(), counts[c.label()])).collect()
}

pub fn generate(cfg: &RunConfig, out: &Path, manifest: &mut RunManifest) -> Result<GenerateOutcome, CliError> {
    let started = now();
    let (spec, grammar_json) = load_grammar(cfg)?;
    let corpus = generate_corpus(&spec, cfg.seed, cfg.corpus.n_per_class).map_err(corpus_error)?;
    let vocab = if corpus.is_empty() { Vocabulary::from_words([]) } else { build_vocab(&corpus).map_err(corpus_error)? };
    ensure_dir(out)?;
    let corpus_bytes = corpus.to_jsonl_bytes();
    write_artifact(out, CORPUS_FILE, &corpus_bytes, manifest)?;
    write_artifact(out, VOCAB_FILE, vocab.to_json().as_bytes(), manifest)?;
    if let Some(text) = &grammar_json {
        write_artifact(out, GRAMMAR_FILE, text.as_bytes(), manifest)?;
    }
    let corpus_sha256 = sha256_hex(&corpus_bytes);
    manifest.grammar_json = grammar_json;
    manifest.corpus_sha256 = Some(corpus_sha256.clone());
    manifest.record_stage("generate", started);
    manifest.write(out)?;
    Ok(GenerateOutcome {
        sentences: corpus.len(),
        class_counts: class_histogram(corpus.class_counts()),
        vocab_size: vocab.len(),
        corpus_sha256,
    })
}

// ---------------------------------------------------------------- train

pub struct CorpusFiles {
    pub corpus: Corpus,
    pub vocab: Vocabulary,
    pub corpus_sha256: String,
    pub vocab_sha256: String,
}

pub fn load_corpus_dir(dir: &Path) -> Result<CorpusFiles, CliError> {
    let corpus_path = dir.join(CORPUS_FILE);
    let vocab_path = dir.join(VOCAB_FILE);
    let corpus_bytes = read_file(&corpus_path)?;
    let vocab_bytes = read_file(&vocab_path)?;
    let corpus = Corpus::read_jsonl(corpus_bytes.as_slice())
        .map_err(|e| CliError::Domain(format!("{}: {e}", corpus_path.display())))?;
    let vocab_text = String::from_utf8(vocab_bytes.clone())
        .map_err(|e| CliError::Domain(format!("{}: {e}", vocab_path.display())))?;
    let vocab =
        Vocabulary::from_json(&vocab_text).map_err(|e| CliError::Domain(format!("{}: {e}", vocab_path.display())))?;
    Ok(CorpusFiles { corpus, vocab, corpus_sha256: sha256_hex(&corpus_bytes), vocab_sha256: sha256_hex(&vocab_bytes) })
}

#[derive(Debug, Clone, Serialize)]
pub struct TrainOutcome {
    pub epochs: usize,
    pub final_train_loss: Option<f64>,
    pub val_accuracy: f64,
    pub val_perplexity: f64,
    pub checkpoint_sha256: String,
}

fn rnn_error(e: RnnError) -> CliError {
    CliError::domain(e)
}

fn train_log_csv(history: &[EpochRecord]) -> String {
    let mut s = String::from("epoch,train_loss,val_loss,val_accuracy\n");
    let opt = |v: Option<f64>| v.map_or(String::new(), |x| x.to_string());
    for r in history {
        writeln!(s, "{},{},{},{}", r.epoch, r.train_loss, opt(r.val_loss), opt(r.val_accuracy)).unwrap();
    }
    s
}

/// Trains on the stratified train split and writes the checkpoint and log.
/// With `untrained` the seed-initialized weights are saved as they are.
pub fn train(
    cfg: &RunConfig,
    corpus_dir: &Path,
    out: &Path,
    untrained: bool,
    manifest: &mut RunManifest,
) -> Result<TrainOutcome, CliError> {
    let started = now();
    let files = load_corpus_dir(corpus_dir)?;
    if files.corpus.is_empty() {
        return Err(rnn_error(RnnError::EmptyCorpus));
    }
    let encoded = encode_with(&files.corpus, &files.vocab, cfg.corpus.padding);
    let (train_set, val_set) = split(&encoded, cfg.corpus.train_fraction, cfg.seed).map_err(corpus_error)?;
    let model_cfg = ModelConfig {
        embedding_dim: cfg.model.embedding_dim,
        hidden_dim_1: cfg.model.hidden_dim_1,
        hidden_dim_2: cfg.model.hidden_dim_2,
        init_scale: cfg.model.init_scale,
        rng_seed: cfg.seed,
        ..ModelConfig::new(files.vocab.len(), encoded.t_max)
    };
    let params = init_params(&model_cfg).map_err(rnn_error)?;
    let (params, history) = if untrained {
        (params, Vec::new())
    } else {
        train_with_validation(params, &train_set, Some(&val_set), &cfg.train_config(), |r| {
            log::info!(
                "epoch {:>3}  train {:.4}  val {:.4}  acc {:.4}",
                r.epoch,
                r.train_loss,
                r.val_loss.unwrap_or(f64::NAN),
                r.val_accuracy.unwrap_or(f64::NAN)
            );
        })
        .map_err(rnn_error)?
    };
    let eval = evaluate(&params, &val_set).map_err(rnn_error)?;

    ensure_dir(out)?;
    let ckpt = checkpoint_bytes(&params, Some(&files.vocab_sha256));
    write_artifact(out, CHECKPOINT_FILE, &ckpt, manifest)?;
    if untrained {
        let stale = out.join(TRAIN_LOG_FILE);
        if stale.exists() {
            std::fs::remove_file(&stale).map_err(|e| CliError::io(&stale, e))?;
        }
        manifest.forget_artifact(TRAIN_LOG_FILE);
    } else {
        write_artifact(out, TRAIN_LOG_FILE, train_log_csv(&history).as_bytes(), manifest)?;
    }
    let checkpoint_sha256 = sha256_hex(&ckpt);
    manifest.corpus_sha256 = Some(files.corpus_sha256);
    manifest.checkpoint_sha256 = Some(checkpoint_sha256.clone());
    manifest.record_stage(if untrained { "init" } else { "train" }, started);
    manifest.write(out)?;
    Ok(TrainOutcome {
        epochs: history.len(),
        final_train_loss: history.last().map(|r| r.train_loss),
        val_accuracy: eval.accuracy,
        val_perplexity: eval.perplexity,
        checkpoint_sha256,
    })
}

// ---------------------------------------------------------------- analyze

/// One `gdv.json` entry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GdvEntry {
    pub layer: LayerId,
    pub gdv: f64,
    pub intra: Vec<f64>,
    pub inter: Vec<Vec<f64>>,
    pub d_eff: usize,
    pub dropped_dims: usize,
}

/// Expected ordering across layers: every GDV negative, the second LSTM
/// layer the most negative, and the output layer above it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrdinalPattern {
    pub all_negative: bool,
    pub lstm2_most_negative: bool,
    pub output_above_lstm2: bool,
    pub matches: bool,
}

impl OrdinalPattern {
    pub fn evaluate(values: &[(LayerId, f64)]) -> Self {
        let get = |l: LayerId| values.iter().find(|(k, _)| *k == l).map(|&(_, v)| v);
        let all_negative = !values.is_empty() && values.iter().all(|&(_, v)| v < 0.0);
        let lstm2_most_negative = argmin(values) == Some(LayerId::Lstm2);
        let output_above_lstm2 = matches!((get(LayerId::Output), get(LayerId::Lstm2)), (Some(o), Some(l)) if o > l);
        Self {
            all_negative,
            lstm2_most_negative,
            output_above_lstm2,
            matches: all_negative && lstm2_most_negative && output_above_lstm2,
        }
    }
}

pub fn argmin(values: &[(LayerId, f64)]) -> Option<LayerId> {
    values.iter().min_by(|a, b| a.1.total_cmp(&b.1)).map(|&(l, _)| l)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectionRecord {
    pub layer: LayerId,
    pub method: ProjectionMethod,
    pub csv: String,
    pub svg: String,
    pub diagnostics: ProjectionDiagnostics,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingMetrics {
    pub epochs: usize,
    pub final_train_loss: f64,
    pub final_val_loss: Option<f64>,
    pub final_val_accuracy: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisSummary {
    pub checkpoint_sha256: String,
    pub corpus_sha256: String,
    pub sentences: usize,
    pub pooling: PoolingPlan,
    pub gdv: Vec<(LayerId, f64)>,
    /// Layers from most to least negative GDV.
    pub ranking: Vec<LayerId>,
    pub argmin_layer: LayerId,
    pub pattern: OrdinalPattern,
    pub projections: Vec<ProjectionRecord>,
    pub training: Option<TrainingMetrics>,
}

fn projection_csv(coords: &Matrix, labels: &[usize]) -> String {
    let mut s = String::from("index,label,x,y\n");
    for (i, &l) in labels.iter().enumerate() {
        let name = Construction::from_label(l).map_or("unknown", |c| c.as_str());
        writeln!(s, "{i},{name},{},{}", coords[(i, 0)], coords[(i, 1)]).unwrap();
    }
    s
}

fn read_training_metrics(dir: &Path) -> Option<TrainingMetrics> {
    let text = std::fs::read_to_string(dir.join(TRAIN_LOG_FILE)).ok()?;
    let rows: Vec<&str> = text.lines().skip(1).filter(|l| !l.is_empty()).collect();
    let last: Vec<&str> = rows.last()?.split(',').collect();
    let num = |s: &str| s.parse::<f64>().ok();
    Some(TrainingMetrics {
        epochs: rows.len(),
        final_train_loss: num(last.get(1)?)?,
        final_val_loss: last.get(2).and_then(|s| num(s)),
        final_val_accuracy: last.get(3).and_then(|s| num(s)),
    })
}

/// Extracts pooled activations for the whole corpus, scores every layer and
/// writes projections. All results are computed before any file is written.
pub fn analyze(
    cfg: &RunConfig,
    corpus_dir: &Path,
    checkpoint: &Path,
    out: &Path,
    manifest: &mut RunManifest,
) -> Result<AnalysisSummary, CliError> {
    let started = now();
    let files = load_corpus_dir(corpus_dir)?;
    let ckpt = read_file(checkpoint)?;
    let (params, header) =
        load_checkpoint(&ckpt).map_err(|e| CliError::Domain(format!("{}: {e}", checkpoint.display())))?;
    if let Some(expected) = &header.vocab_sha256 {
        if *expected != files.vocab_sha256 {
            return Err(CliError::Domain(format!(
                "vocabulary mismatch: checkpoint was trained with vocab {expected}, {} has {}",
                corpus_dir.join(VOCAB_FILE).display(),
                files.vocab_sha256
            )));
        }
    }
    if files.corpus.len() < 4 {
        return Err(CliError::Domain(format!("need at least 4 sentences to analyze, got {}", files.corpus.len())));
    }
    let checkpoint_sha256 = sha256_hex(&ckpt);
    let encoded = encode_with(&files.corpus, &files.vocab, cfg.corpus.padding);
    let plan = cfg.pooling_plan();
    let tables = extract_all(&params, &encoded, &plan, &checkpoint_sha256).map_err(CliError::domain)?;

    let mut entries = Vec::new();
    for layer in LayerId::ALL {
        let set = tables[&layer].point_set().map_err(|e| CliError::Domain(format!("{layer}: {e}")))?;
        let r = gdv(&set).map_err(|e| CliError::Domain(format!("{layer}: {e}")))?;
        log::info!("{layer}: GDV {:.4} over {} dimensions", r.gdv, r.d_eff);
        entries.push(GdvEntry {
            layer,
            gdv: r.gdv,
            intra: r.intra,
            inter: r.inter,
            d_eff: r.d_eff,
            dropped_dims: r.dropped_dims,
        });
    }

    let mut methods = Vec::new();
    if cfg.analysis.method.mds() {
        methods.push(ProjectionMethod::Mds);
    }
    if cfg.analysis.method.tsne() {
        methods.push(ProjectionMethod::Tsne);
    }
    let tsne_cfg = cfg.tsne_config();
    let mut projections = Vec::new();
    let mut outputs: Vec<(String, String)> = Vec::new();
    for layer in LayerId::ALL {
        let table = &tables[&layer];
        for &method in &methods {
            log::info!("{layer}: {} projection", method.as_str());
            let result = match method {
                ProjectionMethod::Mds => {
                    let pts = if cfg.analysis.mds_zscore {
                        zscore_half(&table.points).map_err(|e| CliError::Domain(format!("{layer}: {e}")))?.0
                    } else {
                        table.points.clone()
                    };
                    classical_mds(&pairwise_distances(&pts), 2)
                }
                ProjectionMethod::Tsne => tsne(&table.points, &tsne_cfg),
            }
            .map_err(|e| CliError::Domain(format!("{layer} {}: {e}", method.as_str())))?;
            let stem = projection_stem(layer, method);
            let title = format!("{} ({})", layer.as_str(), method.as_str());
            outputs.push((format!("{stem}.csv"), projection_csv(&result.coords, &table.labels)));
            outputs.push((format!("{stem}.svg"), svg::scatter(&title, &result.coords, &table.labels)));
            projections.push(ProjectionRecord {
                layer,
                method,
                csv: format!("{stem}.csv"),
                svg: format!("{stem}.svg"),
                diagnostics: result.diagnostics,
            });
        }
    }

    let values: Vec<(LayerId, f64)> = entries.iter().map(|e| (e.layer, e.gdv)).collect();
    let mut ranking = values.clone();
    ranking.sort_by(|a, b| a.1.total_cmp(&b.1));
    let summary = AnalysisSummary {
        checkpoint_sha256,
        corpus_sha256: files.corpus_sha256.clone(),
        sentences: files.corpus.len(),
        pooling: plan,
        pattern: OrdinalPattern::evaluate(&values),
        argmin_layer: ranking[0].0,
        ranking: ranking.iter().map(|&(l, _)| l).collect(),
        gdv: values,
        projections,
        training: read_training_metrics(checkpoint.parent().unwrap_or(Path::new("."))),
    };

    ensure_dir(out)?;
    for method in [ProjectionMethod::Mds, ProjectionMethod::Tsne] {
        if methods.contains(&method) {
            continue;
        }
        for layer in LayerId::ALL {
            for ext in ["csv", "svg"] {
                let rel = format!("{}.{ext}", projection_stem(layer, method));
                let path = out.join(&rel);
                if path.exists() {
                    std::fs::remove_file(&path).map_err(|e| CliError::io(&path, e))?;
                }
                manifest.forget_artifact(&rel);
            }
        }
    }
    let mut gdv_json = serde_json::to_string_pretty(&entries).expect("gdv entries serialize");
    gdv_json.push('\n');
    write_artifact(out, GDV_FILE, gdv_json.as_bytes(), manifest)?;
    for (rel, text) in &outputs {
        write_artifact(out, rel, text.as_bytes(), manifest)?;
    }
    if cfg.analysis.save_activations {
        for (layer, table) in &tables {
            let stem = format!("activations/{}", layer.as_str());
            write_artifact(out, &format!("{stem}.acts"), &table.to_bytes(), manifest)?;
            let mut side = serde_json::to_string_pretty(&table.manifest()).expect("table manifest serializes");
            side.push('\n');
            write_artifact(out, &format!("{stem}.json"), side.as_bytes(), manifest)?;
        }
    }
    let mut summary_json = serde_json::to_string_pretty(&summary).expect("summary serializes");
    summary_json.push('\n');
    write_artifact(out, SUMMARY_FILE, summary_json.as_bytes(), manifest)?;
    manifest.corpus_sha256 = Some(files.corpus_sha256);
    manifest.checkpoint_sha256 = Some(summary.checkpoint_sha256.clone());
    manifest.record_stage("analyze", started);
    manifest.write(out)?;
    Ok(summary)
}

// ---------------------------------------------------------------- report

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportLayer {
    pub layer: LayerId,
    pub gdv: f64,
    pub d_eff: usize,
    pub is_min: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub layers: Vec<ReportLayer>,
    pub argmin_layer: LayerId,
    pub pattern: OrdinalPattern,
    pub matches_reference_pattern: bool,
    pub projections: Vec<String>,
    pub training: Option<TrainingMetrics>,
}

/// Checks that every file the analysis declared is present, then builds the
/// report. A missing file is a domain error naming the file.
pub fn report(run_dir: &Path) -> Result<Report, CliError> {
    let need = |rel: &str| -> Result<PathBuf, CliError> {
        let p = run_dir.join(rel);
        if p.is_file() {
            Ok(p)
        } else {
            Err(CliError::Domain(format!("missing analysis output: {}", p.display())))
        }
    };
    let gdv_path = need(GDV_FILE)?;
    let summary_path = need(SUMMARY_FILE)?;
    let entries: Vec<GdvEntry> = serde_json::from_slice(&read_file(&gdv_path)?)
        .map_err(|e| CliError::Domain(format!("{}: {e}", gdv_path.display())))?;
    let summary: AnalysisSummary = serde_json::from_slice(&read_file(&summary_path)?)
        .map_err(|e| CliError::Domain(format!("{}: {e}", summary_path.display())))?;
    for layer in LayerId::ALL {
        if !entries.iter().any(|e| e.layer == layer) {
            return Err(CliError::Domain(format!("{} has no entry for layer {layer}", gdv_path.display())));
        }
    }
    let mut projections = Vec::new();
    for p in &summary.projections {
        need(&p.csv)?;
        need(&p.svg)?;
        projections.push(p.csv.clone());
    }
    let values: Vec<(LayerId, f64)> = entries.iter().map(|e| (e.layer, e.gdv)).collect();
    let min = argmin(&values).expect("four layers present");
    let pattern = OrdinalPattern::evaluate(&values);
    Ok(Report {
        layers: entries
            .iter()
            .map(|e| ReportLayer { layer: e.layer, gdv: e.gdv, d_eff: e.d_eff, is_min: e.layer == min })
            .collect(),
        argmin_layer: min,
        matches_reference_pattern: pattern.matches,
        pattern,
        projections,
        training: summary.training,
    })
}

pub fn render_report(r: &Report) -> String {
    let yes_no = |b: bool| if b { "yes" } else { "no" };
    let mut s = String::new();
    writeln!(s, "{:<10} {:>10} {:>6}", "layer", "gdv", "dims").unwrap();
    for l in &r.layers {
        let mark = if l.is_min { "  <- most negative" } else { "" };
        writeln!(s, "{:<10} {:>10.4} {:>6}{mark}", l.layer.as_str(), l.gdv, l.d_eff).unwrap();
    }
    if let Some(t) = &r.training {
        let acc = t.final_val_accuracy.map_or("n/a".to_string(), |a| format!("{a:.4}"));
        writeln!(s, "training: {} epochs, final train loss {:.4}, val accuracy {acc}", t.epochs, t.final_train_loss)
            .unwrap();
    }
    writeln!(s, "all layers negative: {}", yes_no(r.pattern.all_negative)).unwrap();
    writeln!(s, "lstm2 most negative: {}", yes_no(r.pattern.lstm2_most_negative)).unwrap();
    writeln!(s, "output above lstm2: {}", yes_no(r.pattern.output_above_lstm2)).unwrap();
    writeln!(s, "matches reference pattern: {}", yes_no(r.matches_reference_pattern)).unwrap();
    s
}

// ---------------------------------------------------------------- run / replay

pub fn run_pipeline(cfg: &RunConfig, out: &Path) -> Result<RunManifest, CliError> {
    let mut manifest = open_manifest(out, cfg)?;
    generate(cfg, out, &mut manifest)?;
    train(cfg, out, out, false, &mut manifest)?;
    analyze(cfg, out, &out.join(CHECKPOINT_FILE), out, &mut manifest)?;
    Ok(manifest)
}

#[derive(Debug, Clone, Serialize)]
pub struct ReplayOutcome {
    pub compared: usize,
    pub mismatched: Vec<String>,
    /// Artifacts listed in the original manifest that the replay did not produce.
    pub missing: Vec<String>,
}

/// Re-runs the full pipeline from a manifest's configuration into `out` and
/// compares every artifact hash with the original.
pub fn replay(manifest_path: &Path, out: &Path) -> Result<ReplayOutcome, CliError> {
    let original = RunManifest::read(manifest_path)?;
    let mut cfg = original.config.clone();
    ensure_dir(out)?;
    if let Some(text) = &original.grammar_json {
        let path = out.join(GRAMMAR_FILE);
        std::fs::write(&path, text).map_err(|e| CliError::io(&path, e))?;
        cfg.corpus.grammar = Some(path);
    }
    let stale = out.join(MANIFEST_FILE);
    if stale.exists() {
        std::fs::remove_file(&stale).map_err(|e| CliError::io(&stale, e))?;
    }
    let replayed = run_pipeline(&cfg, out)?;
    let mut outcome = ReplayOutcome { compared: 0, mismatched: Vec::new(), missing: Vec::new() };
    for (rel, hash) in &original.artifacts {
        match replayed.artifacts.get(rel) {
            Some(h) => {
                outcome.compared += 1;
                if h != hash {
                    outcome.mismatched.push(rel.clone());
                }
            }
            None => outcome.missing.push(rel.clone()),
        }
    }
    Ok(outcome)
}
