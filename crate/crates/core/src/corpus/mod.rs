//! Labeled construction corpus: generation, vocabulary, encoding and splits.

mod grammar;
mod split;
mod vocab;

use std::collections::HashSet;
use std::io::{BufRead, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use grammar::{ClassGrammar, Construction, DeterminerPolicy, GrammarSpec, Slot};
pub use split::split;
pub use vocab::{build_vocab, encode, encode_with, EncodedCorpus, PaddingSide, Vocabulary, PAD_ID, UNK_ID};

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("{construction}: only {available} distinct sentences available, {requested} requested")]
    InsufficientCombinations {
        construction: Construction,
        available: usize,
        requested: usize,
    },
    #[error("cannot build a vocabulary from an empty corpus")]
    EmptyCorpus,
    #[error("split at fraction {fraction} leaves class {construction} empty in one part")]
    DegenerateSplit { construction: Construction, fraction: f64 },
    #[error("train fraction must lie strictly between 0 and 1, got {0}")]
    InvalidFraction(f64),
    #[error("invalid grammar: {0}")]
    InvalidGrammar(String),
    #[error("corpus line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Lowercase, whitespace-split, with terminal punctuation stripped from each token.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split_whitespace()
        .map(|w| w.trim_end_matches(['.', ',', '!', '?', ';', ':']).to_lowercase())
        .filter(|w| !w.is_empty())
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Sentence {
    pub words: Vec<String>,
    pub construction: Construction,
}

impl Sentence {
    pub fn new(words: Vec<String>, construction: Construction) -> Self {
        Self { words, construction }
    }

    pub fn label(&self) -> usize {
        self.construction.label()
    }

    /// Surface form: first letter capitalized, terminated by a period.
    pub fn text(&self) -> String {
        let joined = self.words.join(" ");
        let mut chars = joined.chars();
        match chars.next() {
            Some(first) => format!("{}{}.", first.to_uppercase(), chars.as_str()),
            None => String::new(),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct CorpusLine {
    text: String,
    label: String,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Corpus {
    pub sentences: Vec<Sentence>,
    /// Generation seed; `None` for corpora read from disk.
    pub seed: Option<u64>,
}

impl Corpus {
    pub fn len(&self) -> usize {
        self.sentences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sentences.is_empty()
    }

    pub fn class_counts(&self) -> [usize; 4] {
        let mut counts = [0; 4];
        for s in &self.sentences {
            counts[s.label()] += 1;
        }
        counts
    }

    pub fn write_jsonl<W: Write>(&self, mut out: W) -> Result<(), CorpusError> {
        for s in &self.sentences {
            let line = CorpusLine { text: s.text(), label: s.construction.as_str().to_string() };
            let json = serde_json::to_string(&line).expect("corpus line serializes");
            out.write_all(json.as_bytes())?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn to_jsonl_bytes(&self) -> Vec<u8> {
        let mut buf = Vec::new();
        self.write_jsonl(&mut buf).expect("writing to a Vec cannot fail");
        buf
    }

    pub fn read_jsonl<R: BufRead>(input: R) -> Result<Self, CorpusError> {
        let mut sentences = Vec::new();
        for (i, line) in input.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let parsed: CorpusLine = serde_json::from_str(&line)
                .map_err(|e| CorpusError::Parse { line: i + 1, message: e.to_string() })?;
            let construction = Construction::parse(&parsed.label).ok_or_else(|| CorpusError::Parse {
                line: i + 1,
                message: format!("unknown label {:?}", parsed.label),
            })?;
            sentences.push(Sentence::new(tokenize(&parsed.text), construction));
        }
        Ok(Corpus { sentences, seed: None })
    }
}

/// Draws `n_per_class` distinct sentences per construction, uniformly without
/// replacement over each class's slot-combination space.
///
/// Classes are emitted in label order, each block in sampling order.
pub fn generate_corpus(spec: &GrammarSpec, seed: u64, n_per_class: usize) -> Result<Corpus, CorpusError> {
    spec.validate()?;
    for construction in Construction::ALL {
        let class = spec.class(construction).expect("validated grammar has every class");
        let space = class.combination_count().unwrap_or(usize::MAX);
        if space < n_per_class {
            return Err(CorpusError::InsufficientCombinations {
                construction,
                available: space,
                requested: n_per_class,
            });
        }
    }
    let mut sentences = Vec::with_capacity(4 * n_per_class);
    for construction in Construction::ALL {
        let class = spec.class(construction).expect("validated grammar has every class");
        let space = class.combination_count().unwrap_or(usize::MAX);
        // Independent stream per class so editing one class's fillers leaves
        // the others' draws untouched.
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(construction.label() as u64);

        let mut used_indices = HashSet::new();
        let mut seen = HashSet::new();
        let mut drawn = 0usize;
        while drawn < n_per_class {
            if used_indices.len() == space {
                // Distinct combinations collapsed onto the same word sequence.
                return Err(CorpusError::InsufficientCombinations {
                    construction,
                    available: seen.len(),
                    requested: n_per_class,
                });
            }
            let idx = rng.random_range(0..space);
            if !used_indices.insert(idx) {
                continue;
            }
            let words = class.realize(idx, spec.determiner_policy);
            if seen.insert(words.clone()) {
                sentences.push(Sentence::new(words, construction));
                drawn += 1;
            }
        }
    }
    Ok(Corpus { sentences, seed: Some(seed) })
}
