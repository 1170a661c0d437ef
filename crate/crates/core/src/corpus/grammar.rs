//! Template grammars for the four argument structure constructions.

use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::CorpusError;

/// The four construction classes. The discriminant doubles as the class label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Construction {
    Transitive = 0,
    Ditransitive = 1,
    CausedMotion = 2,
    Resultative = 3,
}

impl Construction {
    pub const ALL: [Construction; 4] = [
        Construction::Transitive,
        Construction::Ditransitive,
        Construction::CausedMotion,
        Construction::Resultative,
    ];

    pub fn label(self) -> usize {
        self as usize
    }

    pub fn from_label(label: usize) -> Option<Self> {
        Self::ALL.get(label).copied()
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Construction::Transitive => "transitive",
            Construction::Ditransitive => "ditransitive",
            Construction::CausedMotion => "caused_motion",
            Construction::Resultative => "resultative",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|c| c.as_str() == s)
    }

    /// Slot sequence realizing the construction's argument structure.
    pub fn structure(self) -> &'static [Slot] {
        use Slot::*;
        match self {
            Construction::Transitive => &[Subject, Verb, Object],
            Construction::Ditransitive => &[Subject, Verb, Recipient, Object],
            Construction::CausedMotion => &[Subject, Verb, Object, Path],
            Construction::Resultative => &[Subject, Verb, Object, State],
        }
    }
}

impl fmt::Display for Construction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Slot {
    Subject,
    Verb,
    Object,
    Recipient,
    Path,
    State,
}

/// How noun-phrase fillers are rendered.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DeterminerPolicy {
    /// Fillers are used exactly as written, determiners included.
    #[default]
    Verbatim,
    /// Leading indefinite articles ("a", "an", "some") are rewritten to "the".
    Definite,
}

impl DeterminerPolicy {
    fn apply(self, phrase: &str) -> String {
        match self {
            DeterminerPolicy::Verbatim => phrase.to_string(),
            DeterminerPolicy::Definite => {
                let mut words = phrase.split_whitespace();
                match words.next() {
                    Some("a" | "an" | "some") => {
                        let rest: Vec<&str> = words.collect();
                        if rest.is_empty() {
                            phrase.to_string()
                        } else {
                            format!("the {}", rest.join(" "))
                        }
                    }
                    _ => phrase.to_string(),
                }
            }
        }
    }
}

/// Slot fillers and template for a single construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassGrammar {
    pub construction: Construction,
    pub template: Vec<Slot>,
    #[serde(default)]
    pub subjects: Vec<String>,
    #[serde(default)]
    pub verbs: Vec<String>,
    #[serde(default)]
    pub objects: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub recipients: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub paths: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub states: Vec<String>,
}

impl ClassGrammar {
    pub fn fillers(&self, slot: Slot) -> &[String] {
        match slot {
            Slot::Subject => &self.subjects,
            Slot::Verb => &self.verbs,
            Slot::Object => &self.objects,
            Slot::Recipient => &self.recipients,
            Slot::Path => &self.paths,
            Slot::State => &self.states,
        }
    }

    /// Number of distinct slot combinations, or `None` on overflow.
    pub fn combination_count(&self) -> Option<usize> {
        self.template
            .iter()
            .try_fold(1usize, |acc, &slot| acc.checked_mul(self.fillers(slot).len()))
    }

    /// Mixed-radix decode of a combination index into one filler per slot.
    /// The last template slot varies fastest.
    pub fn realize(&self, mut index: usize, policy: DeterminerPolicy) -> Vec<String> {
        let mut picks = vec![0usize; self.template.len()];
        for (k, &slot) in self.template.iter().enumerate().rev() {
            let n = self.fillers(slot).len();
            picks[k] = index % n;
            index /= n;
        }
        let mut words = Vec::new();
        for (&slot, &pick) in self.template.iter().zip(&picks) {
            let phrase = policy.apply(&self.fillers(slot)[pick]);
            words.extend(super::tokenize(&phrase));
        }
        words
    }
}

/// Full grammar: one [`ClassGrammar`] per construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrammarSpec {
    #[serde(default)]
    pub determiner_policy: DeterminerPolicy,
    /// Verbs allowed to appear in more than one class.
    #[serde(default)]
    pub shared_verbs: Vec<String>,
    pub classes: Vec<ClassGrammar>,
}

const DEFAULT_GRAMMAR: &str = include_str!("default_grammar.json");

impl Default for GrammarSpec {
    fn default() -> Self {
        serde_json::from_str(DEFAULT_GRAMMAR).expect("embedded grammar is valid JSON")
    }
}

impl GrammarSpec {
    /// The embedded default grammar as pretty JSON.
    pub fn default_json() -> &'static str {
        DEFAULT_GRAMMAR
    }

    pub fn from_json(text: &str) -> Result<Self, CorpusError> {
        let spec: GrammarSpec =
            serde_json::from_str(text).map_err(|e| CorpusError::InvalidGrammar(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn class(&self, construction: Construction) -> Option<&ClassGrammar> {
        self.classes.iter().find(|c| c.construction == construction)
    }

    pub fn validate(&self) -> Result<(), CorpusError> {
        let bad = |msg: String| Err(CorpusError::InvalidGrammar(msg));
        if self.classes.len() != 4 {
            return bad(format!("expected 4 construction classes, found {}", self.classes.len()));
        }
        for construction in Construction::ALL {
            let matching = self.classes.iter().filter(|c| c.construction == construction).count();
            if matching != 1 {
                return bad(format!("construction {construction} defined {matching} times"));
            }
        }
        for class in &self.classes {
            if class.template != class.construction.structure() {
                return bad(format!(
                    "template for {} must be {:?}, got {:?}",
                    class.construction,
                    class.construction.structure(),
                    class.template
                ));
            }
            for &slot in &class.template {
                let fillers = class.fillers(slot);
                if fillers.is_empty() {
                    return bad(format!("{}: slot {slot:?} has no fillers", class.construction));
                }
                let mut seen = HashSet::new();
                for f in fillers {
                    let norm = super::tokenize(f).join(" ");
                    if norm.is_empty() {
                        return bad(format!("{}: empty filler in slot {slot:?}", class.construction));
                    }
                    if !seen.insert(norm) {
                        return bad(format!(
                            "{}: duplicate filler {f:?} in slot {slot:?}",
                            class.construction
                        ));
                    }
                }
            }
        }
        let shared: HashSet<&str> = self.shared_verbs.iter().map(String::as_str).collect();
        for (a, ca) in self.classes.iter().enumerate() {
            for cb in &self.classes[a + 1..] {
                if let Some(v) = ca
                    .verbs
                    .iter()
                    .find(|v| cb.verbs.contains(v) && !shared.contains(v.as_str()))
                {
                    return bad(format!(
                        "verb {v:?} appears in both {} and {} without being listed as shared",
                        ca.construction, cb.construction
                    ));
                }
            }
        }
        Ok(())
    }

    /// Whether `words` can be produced by the grammar for `construction`.
    pub fn can_generate(&self, construction: Construction, words: &[String]) -> bool {
        let Some(class) = self.class(construction) else {
            return false;
        };
        let slots: Vec<Vec<Vec<String>>> = class
            .template
            .iter()
            .map(|&s| {
                class
                    .fillers(s)
                    .iter()
                    .map(|f| super::tokenize(&self.determiner_policy.apply(f)))
                    .collect()
            })
            .collect();
        fn matches(slots: &[Vec<Vec<String>>], words: &[String]) -> bool {
            match slots.split_first() {
                None => words.is_empty(),
                Some((first, rest)) => first.iter().any(|f| {
                    words.len() >= f.len()
                        && words[..f.len()] == f[..]
                        && matches(rest, &words[f.len()..])
                }),
            }
        }
        matches(&slots, words)
    }
}
