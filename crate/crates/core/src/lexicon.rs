//! Coherence cue vocabulary.
//!
//! A lexicon maps cue phrases ("because", "for example") to one of six
//! coherence functionalities. The file format is one `phrase<TAB>category`
//! entry per line; `#` lines are comments, and a `# version: <id>` comment
//! names the lexicon. Files without a version line are identified by a
//! digest of their contents.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, LexiconError, Result};

const DEFAULT_LEXICON: &str = include_str!("../data/default_lexicon.tsv");

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Category {
    Causality,
    Contrast,
    Exemplification,
    Clarification,
    Similarity,
    Hypothesis,
}

impl Category {
    pub const ALL: [Category; 6] = [
        Category::Causality,
        Category::Contrast,
        Category::Exemplification,
        Category::Clarification,
        Category::Similarity,
        Category::Hypothesis,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Category::Causality => "Causality",
            Category::Contrast => "Contrast",
            Category::Exemplification => "Exemplification",
            Category::Clarification => "Clarification",
            Category::Similarity => "Similarity",
            Category::Hypothesis => "Hypothesis",
        }
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Category {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, ()> {
        Category::ALL
            .into_iter()
            .find(|c| c.as_str().eq_ignore_ascii_case(s.trim()))
            .ok_or(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CueEntry {
    pub phrase: String,
    pub category: Category,
    pub single_word: bool,
}

impl CueEntry {
    /// Normalizes the phrase to lowercase with single internal spaces.
    pub fn new(phrase: &str, category: Category) -> Option<Self> {
        let phrase = normalize_phrase(phrase);
        if phrase.is_empty() {
            return None;
        }
        let single_word = !phrase.contains(' ');
        Some(CueEntry {
            phrase,
            category,
            single_word,
        })
    }

    pub fn words(&self) -> impl Iterator<Item = &str> {
        self.phrase.split(' ')
    }
}

fn normalize_phrase(phrase: &str) -> String {
    phrase
        .split_whitespace()
        .map(str::to_lowercase)
        .collect::<Vec<_>>()
        .join(" ")
}

/// Immutable cue vocabulary. Safe to share across threads.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CueLexicon {
    entries: BTreeMap<String, CueEntry>,
    version: String,
    max_phrase_words: usize,
}

impl CueLexicon {
    /// The lexicon bundled with the crate.
    pub fn default_lexicon() -> Self {
        Self::parse(DEFAULT_LEXICON).expect("bundled lexicon is well-formed")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text).map_err(|source| Error::Lexicon {
            path: path.to_path_buf(),
            source,
        })
    }

    pub fn parse(text: &str) -> Result<Self, LexiconError> {
        let mut entries: BTreeMap<String, CueEntry> = BTreeMap::new();
        let mut first_seen: BTreeMap<String, usize> = BTreeMap::new();
        let mut version = None;

        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim_end_matches('\r');
            let trimmed = line.trim();
            if trimmed.is_empty() {
                continue;
            }
            if let Some(comment) = trimmed.strip_prefix('#') {
                if let Some(v) = comment.trim().strip_prefix("version:") {
                    version.get_or_insert_with(|| v.trim().to_string());
                }
                continue;
            }

            let mut fields = line.split('\t');
            let (phrase, category) = match (fields.next(), fields.next(), fields.next()) {
                (Some(p), Some(c), None) => (p, c),
                _ => {
                    return Err(LexiconError::Parse {
                        line: line_no,
                        content: line.to_string(),
                    })
                }
            };
            let category: Category =
                category
                    .parse()
                    .map_err(|()| LexiconError::UnknownCategory {
                        line: line_no,
                        category: category.trim().to_string(),
                    })?;
            let entry = CueEntry::new(phrase, category).ok_or_else(|| LexiconError::Parse {
                line: line_no,
                content: line.to_string(),
            })?;
            if let Some(&first) = first_seen.get(&entry.phrase) {
                return Err(LexiconError::DuplicatePhrase {
                    line: line_no,
                    phrase: entry.phrase,
                    first,
                });
            }
            first_seen.insert(entry.phrase.clone(), line_no);
            entries.insert(entry.phrase.clone(), entry);
        }

        if entries.is_empty() {
            return Err(LexiconError::Empty);
        }
        let version = version.unwrap_or_else(|| {
            let digest = Sha256::digest(text.as_bytes());
            let hex: String = digest[..6].iter().map(|b| format!("{b:02x}")).collect();
            format!("sha256:{hex}")
        });
        Ok(Self::from_parts(entries, version))
    }

    /// Builds a lexicon from entries; later duplicates of a phrase replace earlier ones.
    pub fn from_entries(entries: impl IntoIterator<Item = CueEntry>, version: &str) -> Self {
        let entries = entries
            .into_iter()
            .map(|e| (e.phrase.clone(), e))
            .collect();
        Self::from_parts(entries, version.to_string())
    }

    fn from_parts(entries: BTreeMap<String, CueEntry>, version: String) -> Self {
        let max_phrase_words = entries
            .values()
            .map(|e| e.words().count())
            .max()
            .unwrap_or(0);
        CueLexicon {
            entries,
            version,
            max_phrase_words,
        }
    }

    pub fn version(&self) -> &str {
        &self.version
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> impl Iterator<Item = &CueEntry> {
        self.entries.values()
    }

    /// Case-insensitive exact match on the whole phrase.
    pub fn lookup(&self, word: &str) -> Option<Category> {
        self.entry(word).map(|e| e.category)
    }

    pub fn entry(&self, phrase: &str) -> Option<&CueEntry> {
        match self.entries.get(phrase) {
            Some(e) => Some(e),
            None => self.entries.get(&normalize_phrase(phrase)),
        }
    }

    /// Membership test against single-word entries only; `word` must already be lowercase.
    pub fn is_single_word_cue(&self, word: &str) -> bool {
        self.entries.get(word).is_some_and(|e| e.single_word)
    }

    pub fn single_word_set(&self) -> BTreeSet<String> {
        self.entries
            .values()
            .filter(|e| e.single_word)
            .map(|e| e.phrase.clone())
            .collect()
    }

    pub fn max_phrase_words(&self) -> usize {
        self.max_phrase_words
    }
}
