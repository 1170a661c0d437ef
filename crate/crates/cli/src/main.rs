use std::path::PathBuf;
use std::process::ExitCode;

use ascprobe_cli::commands::{self, CHECKPOINT_FILE};
use ascprobe_cli::config::Overrides;
use ascprobe_cli::{CliError, RunConfig};
use ascprobe_core::corpus::GrammarSpec;
use clap::{Parser, Subcommand};
use serde::Serialize;

#[derive(Parser)]
#[command(name = "ascprobe", version, about = "Probe how a recurrent language model separates argument structure constructions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample a labeled corpus and build its vocabulary.
    Generate {
        #[command(flatten)]
        opts: Overrides,
        /// Run directory.
        #[arg(long, default_value = "run")]
        out: PathBuf,
        /// Custom grammar JSON (see `dump-grammar`).
        #[arg(long)]
        grammar: Option<PathBuf>,
        #[arg(long)]
        json: bool,
    },
    /// Train the LSTM on a generated corpus.
    Train {
        #[command(flatten)]
        opts: Overrides,
        #[arg(long, default_value = "run")]
        out: PathBuf,
        /// Directory holding corpus.jsonl and vocab.json; defaults to --out.
        #[arg(long)]
        corpus: Option<PathBuf>,
        /// Save the seed-initialized weights without training.
        #[arg(long)]
        untrained: bool,
        #[arg(long)]
        json: bool,
    },
    /// Score and project every layer's sentence representations.
    Analyze {
        #[command(flatten)]
        opts: Overrides,
        #[arg(long, default_value = "run")]
        out: PathBuf,
        #[arg(long)]
        corpus: Option<PathBuf>,
        /// Checkpoint file; defaults to model.ckpt in --out.
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        /// Compute MDS distances on z-scored activations.
        #[arg(long)]
        mds_zscore: bool,
        /// Also write the pooled activation tables.
        #[arg(long)]
        save_activations: bool,
        #[arg(long)]
        json: bool,
    },
    /// Summarize an analyzed run directory.
    Report {
        #[arg(long, default_value = "run")]
        out: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// generate, train and analyze in one go.
    Run {
        #[command(flatten)]
        opts: Overrides,
        #[arg(long, default_value = "run")]
        out: PathBuf,
        #[arg(long)]
        grammar: Option<PathBuf>,
        #[arg(long)]
        json: bool,
    },
    /// Re-execute a run from its manifest and compare artifact hashes.
    Replay {
        manifest: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Print the built-in grammar as JSON.
    DumpGrammar,
}

/// Base configuration: an explicit --config file, else the configuration
/// recorded in the run directory, else defaults. Flags apply on top.
fn resolve(opts: &Overrides, out: &std::path::Path) -> Result<RunConfig, CliError> {
    if opts.config.is_none() {
        if let Some(m) = ascprobe_cli::manifest::RunManifest::existing(out)? {
            let mut cfg = m.config;
            cfg.apply(opts);
            cfg.validate()?;
            return Ok(cfg);
        }
    }
    RunConfig::resolve(opts)
}

fn emit<T: Serialize>(json: bool, value: &T, text: impl FnOnce() -> String) {
    if json {
        println!("{}", serde_json::to_string_pretty(value).expect("output serializes"));
    } else {
        print!("{}", text());
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Generate { opts, out, grammar, json } => {
            let mut cfg = resolve(&opts, &out)?;
            if grammar.is_some() {
                cfg.corpus.grammar = grammar;
            }
            let mut m = commands::open_manifest(&out, &cfg)?;
            let o = commands::generate(&cfg, &out, &mut m)?;
            emit(json, &o, || {
                let mut s = format!("{} sentences, vocabulary {}\n", o.sentences, o.vocab_size);
                for (k, v) in &o.class_counts {
                    s.push_str(&format!("  {k}: {v}\n"));
                }
                s
            });
        }
        Command::Train { opts, out, corpus, untrained, json } => {
            let cfg = resolve(&opts, &out)?;
            let mut m = commands::open_manifest(&out, &cfg)?;
            let corpus = corpus.unwrap_or_else(|| out.clone());
            let o = commands::train(&cfg, &corpus, &out, untrained, &mut m)?;
            emit(json, &o, || {
                format!(
                    "{} epochs; val accuracy {:.4}, val perplexity {:.3}\ncheckpoint {}\n",
                    o.epochs, o.val_accuracy, o.val_perplexity, o.checkpoint_sha256
                )
            });
        }
        Command::Analyze { opts, out, corpus, checkpoint, mds_zscore, save_activations, json } => {
            let mut cfg = resolve(&opts, &out)?;
            cfg.analysis.mds_zscore |= mds_zscore;
            cfg.analysis.save_activations |= save_activations;
            let mut m = commands::open_manifest(&out, &cfg)?;
            let corpus = corpus.unwrap_or_else(|| out.clone());
            let checkpoint = checkpoint.unwrap_or_else(|| out.join(CHECKPOINT_FILE));
            commands::analyze(&cfg, &corpus, &checkpoint, &out, &mut m)?;
            let r = commands::report(&out)?;
            emit(json, &r, || commands::render_report(&r));
        }
        Command::Report { out, json } => {
            let r = commands::report(&out)?;
            emit(json, &r, || commands::render_report(&r));
        }
        Command::Run { opts, out, grammar, json } => {
            let mut cfg = resolve(&opts, &out)?;
            if grammar.is_some() {
                cfg.corpus.grammar = grammar;
            }
            commands::run_pipeline(&cfg, &out)?;
            let r = commands::report(&out)?;
            emit(json, &r, || commands::render_report(&r));
        }
        Command::Replay { manifest, out, json } => {
            let o = commands::replay(&manifest, &out)?;
            emit(json, &o, || {
                let mut s = format!("{} artifacts compared, {} differ\n", o.compared, o.mismatched.len());
                for f in o.mismatched.iter().chain(&o.missing) {
                    s.push_str(&format!("  differs: {f}\n"));
                }
                s
            });
            if !o.mismatched.is_empty() || !o.missing.is_empty() {
                return Err(CliError::Domain("replay did not reproduce the original artifacts".into()));
            }
        }
        Command::DumpGrammar => print!("{}", GrammarSpec::default_json()),
    }
    Ok(())
}

fn init_threads() {
    let Ok(v) = std::env::var("ASCPROBE_THREADS") else { return };
    match v.parse::<usize>() {
        Ok(n) if n > 0 => {
            if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
                log::warn!("could not size the worker pool: {e}");
            }
        }
        _ => log::warn!("ignoring ASCPROBE_THREADS={v:?}; expected a positive integer"),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    init_threads();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
