use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use super::{Construction, Corpus, CorpusError, Sentence};

pub const PAD_ID: u32 = 0;
pub const UNK_ID: u32 = 1;
const RESERVED: usize = 2;

/// Word-level vocabulary. Ids 0 and 1 are reserved for padding and unknown
/// words; corpus words follow in sorted order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    words: Vec<String>,
    index: HashMap<String, u32>,
}

#[derive(Serialize, Deserialize)]
struct VocabFile {
    pad_id: u32,
    unk_id: u32,
    words: Vec<String>,
}

impl Vocabulary {
    fn from_sorted(words: Vec<String>) -> Self {
        let index = words
            .iter()
            .enumerate()
            .map(|(i, w)| (w.clone(), (i + RESERVED) as u32))
            .collect();
        Self { words, index }
    }

    /// Vocabulary over the given words (sorted and deduplicated).
    pub fn from_words<I: IntoIterator<Item = String>>(words: I) -> Self {
        let distinct: BTreeSet<String> = words.into_iter().collect();
        Self::from_sorted(distinct.into_iter().collect())
    }

    /// Total id count including the reserved ids.
    pub fn len(&self) -> usize {
        self.words.len() + RESERVED
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn id(&self, word: &str) -> Option<u32> {
        self.index.get(word).copied()
    }

    pub fn word(&self, id: u32) -> Option<&str> {
        match id {
            PAD_ID => Some("<pad>"),
            UNK_ID => Some("<unk>"),
            _ => self.words.get(id as usize - RESERVED).map(String::as_str),
        }
    }

    pub fn to_json(&self) -> String {
        let file = VocabFile { pad_id: PAD_ID, unk_id: UNK_ID, words: self.words.clone() };
        let mut s = serde_json::to_string_pretty(&file).expect("vocabulary serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self, CorpusError> {
        let file: VocabFile =
            serde_json::from_str(text).map_err(|e| CorpusError::Parse { line: 0, message: e.to_string() })?;
        if file.pad_id != PAD_ID || file.unk_id != UNK_ID {
            return Err(CorpusError::Parse {
                line: 0,
                message: format!("reserved ids must be pad=0 unk=1, got {} {}", file.pad_id, file.unk_id),
            });
        }
        let vocab = Self::from_sorted(file.words);
        if vocab.index.len() != vocab.words.len() {
            return Err(CorpusError::Parse { line: 0, message: "duplicate vocabulary entries".into() });
        }
        Ok(vocab)
    }

    /// Maps ids back to words, dropping padding.
    pub fn decode(&self, ids: &[u32]) -> Vec<String> {
        ids.iter()
            .filter(|&&id| id != PAD_ID)
            .map(|&id| self.word(id).unwrap_or("<unk>").to_string())
            .collect()
    }
}

pub fn build_vocab(corpus: &Corpus) -> Result<Vocabulary, CorpusError> {
    if corpus.is_empty() {
        return Err(CorpusError::EmptyCorpus);
    }
    let distinct: BTreeSet<&str> =
        corpus.sentences.iter().flat_map(|s| s.words.iter().map(String::as_str)).collect();
    Ok(Vocabulary::from_sorted(distinct.into_iter().map(str::to_string).collect()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PaddingSide {
    /// Real tokens first, padding after.
    #[default]
    Post,
    /// Padding first, real tokens right-aligned.
    Pre,
}

/// Padded id matrix with its mask, stored row-major as `len() × t_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct EncodedCorpus {
    pub tokens: Vec<u32>,
    pub mask: Vec<u8>,
    pub labels: Vec<usize>,
    pub t_max: usize,
    pub padding: PaddingSide,
    pub vocab: Vocabulary,
    /// Out-of-vocabulary words mapped to UNK.
    pub unk_count: usize,
}

impl EncodedCorpus {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn tokens_row(&self, i: usize) -> &[u32] {
        &self.tokens[i * self.t_max..(i + 1) * self.t_max]
    }

    pub fn mask_row(&self, i: usize) -> &[u8] {
        &self.mask[i * self.t_max..(i + 1) * self.t_max]
    }

    pub fn sentence_len(&self, i: usize) -> usize {
        self.mask_row(i).iter().map(|&m| m as usize).sum()
    }

    pub fn decode_row(&self, i: usize) -> Vec<String> {
        self.vocab.decode(self.tokens_row(i))
    }

    /// Rows `indices`, in the given order, keeping the width.
    pub fn select(&self, indices: &[usize]) -> EncodedCorpus {
        let mut tokens = Vec::with_capacity(indices.len() * self.t_max);
        let mut mask = Vec::with_capacity(indices.len() * self.t_max);
        let mut labels = Vec::with_capacity(indices.len());
        for &i in indices {
            tokens.extend_from_slice(self.tokens_row(i));
            mask.extend_from_slice(self.mask_row(i));
            labels.push(self.labels[i]);
        }
        EncodedCorpus {
            tokens,
            mask,
            labels,
            t_max: self.t_max,
            padding: self.padding,
            vocab: self.vocab.clone(),
            unk_count: 0,
        }
    }

    pub fn class_counts(&self) -> [usize; 4] {
        let mut counts = [0; 4];
        for &l in &self.labels {
            counts[l] += 1;
        }
        counts
    }

    /// Reconstructs the sentence list (UNK positions decode as `<unk>`).
    pub fn to_sentences(&self) -> Vec<Sentence> {
        (0..self.len())
            .map(|i| {
                Sentence::new(
                    self.decode_row(i),
                    Construction::from_label(self.labels[i]).expect("labels are in range"),
                )
            })
            .collect()
    }
}

pub fn encode(corpus: &Corpus, vocab: &Vocabulary) -> EncodedCorpus {
    encode_with(corpus, vocab, PaddingSide::Post)
}

pub fn encode_with(corpus: &Corpus, vocab: &Vocabulary, padding: PaddingSide) -> EncodedCorpus {
    let t_max = corpus.sentences.iter().map(|s| s.words.len()).max().unwrap_or(0);
    let n = corpus.len();
    let mut tokens = vec![PAD_ID; n * t_max];
    let mut mask = vec![0u8; n * t_max];
    let mut unk_count = 0;
    for (i, s) in corpus.sentences.iter().enumerate() {
        let offset = match padding {
            PaddingSide::Post => 0,
            PaddingSide::Pre => t_max - s.words.len(),
        };
        for (k, w) in s.words.iter().enumerate() {
            let id = vocab.id(w).unwrap_or_else(|| {
                unk_count += 1;
                UNK_ID
            });
            tokens[i * t_max + offset + k] = id;
            mask[i * t_max + offset + k] = 1;
        }
    }
    if unk_count > 0 {
        log::warn!("{unk_count} out-of-vocabulary tokens encoded as UNK");
    }
    EncodedCorpus {
        tokens,
        mask,
        labels: corpus.sentences.iter().map(Sentence::label).collect(),
        t_max,
        padding,
        vocab: vocab.clone(),
        unk_count,
    }
}
