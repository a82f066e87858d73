//! Write-time feedback on a single review comment.
//!
//! The linter reports coherence cues (single and multi-word), modal/request
//! words, and how often cue words sit next to code references. A comment is
//! flagged as carrying a rationale when a cue word is collocated with code,
//! or when it contains a causal, conditional or contrastive cue.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::collocation::{extract_pairs, WindowConfig};
use crate::corpus::Comment;
use crate::lexicon::{Category, CueLexicon};
use crate::preprocess::{PreprocessConfig, Preprocessor, TokenStream, CODE_PLACEHOLDER};

/// Half-open token index range `start..end`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub fn new(start: usize, end: usize) -> Self {
        Span { start, end }
    }

    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.end == self.start
    }

    fn overlaps(&self, other: &Span) -> bool {
        self.start < other.end && other.start < self.end
    }
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}..{}", self.start, self.end)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Rule {
    CoherenceCue,
    CueNearCode,
    ModalRequest,
    MissingRationale,
}

impl Rule {
    pub fn as_str(self) -> &'static str {
        match self {
            Rule::CoherenceCue => "coherence-cue",
            Rule::CueNearCode => "cue-near-code",
            Rule::ModalRequest => "modal-request",
            Rule::MissingRationale => "missing-rationale",
        }
    }

    pub fn is_cue_rule(self) -> bool {
        matches!(self, Rule::CoherenceCue | Rule::CueNearCode)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Info,
    Advice,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LintFinding {
    pub rule: Rule,
    pub severity: Severity,
    pub span: Span,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub category: Option<Category>,
    /// Tokens that triggered the finding, space-joined.
    pub matched: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LintReport {
    pub comment_id: String,
    pub tokens: Vec<String>,
    pub findings: Vec<LintFinding>,
    pub cue_categories_present: BTreeSet<Category>,
    pub code_refs: usize,
    pub code_cue_collocations: usize,
    pub modal_requests: usize,
    pub rationale_flag: bool,
    pub lexicon_version: String,
}

impl LintReport {
    /// One `id:start..end: severity[rule] message` line per finding.
    pub fn diagnostics(&self) -> Vec<String> {
        self.findings
            .iter()
            .map(|f| {
                let sev = match f.severity {
                    Severity::Info => "info",
                    Severity::Advice => "advice",
                };
                format!(
                    "{}:{}: {}[{}] {}",
                    self.comment_id,
                    f.span,
                    sev,
                    f.rule.as_str(),
                    f.message
                )
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LintConfig {
    pub preprocess: PreprocessConfig,
    pub window: WindowConfig,
    pub modal_words: Vec<String>,
    /// Cue categories that on their own signal a rationale.
    pub rationale_categories: Vec<Category>,
    pub min_code_cue_collocations: usize,
}

impl Default for LintConfig {
    fn default() -> Self {
        LintConfig {
            preprocess: PreprocessConfig::default(),
            window: WindowConfig::default(),
            modal_words: [
                "should", "may", "might", "could", "would", "must", "shall", "please", "maybe",
            ]
            .map(String::from)
            .to_vec(),
            rationale_categories: vec![
                Category::Causality,
                Category::Hypothesis,
                Category::Contrast,
            ],
            min_code_cue_collocations: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CueMatch {
    pub span: Span,
    pub category: Category,
    pub phrase: String,
}

/// Finds cue phrases over consecutive tokens. Overlaps are resolved by
/// keeping longer matches first, then leftmost ones.
pub fn detect_cues(stream: &TokenStream, lexicon: &CueLexicon) -> Vec<CueMatch> {
    let tokens = &stream.tokens;
    let max = lexicon.max_phrase_words().max(1);
    let mut candidates = Vec::new();
    for start in 0..tokens.len() {
        let mut phrase = String::new();
        for end in start + 1..=(start + max).min(tokens.len()) {
            if !phrase.is_empty() {
                phrase.push(' ');
            }
            phrase.push_str(&tokens[end - 1]);
            if let Some(entry) = lexicon.entry(&phrase) {
                if entry.phrase == phrase {
                    candidates.push(CueMatch {
                        span: Span::new(start, end),
                        category: entry.category,
                        phrase: entry.phrase.clone(),
                    });
                }
            }
        }
    }
    candidates.sort_by(|a, b| {
        b.span
            .len()
            .cmp(&a.span.len())
            .then(a.span.start.cmp(&b.span.start))
    });
    let mut chosen: Vec<CueMatch> = Vec::new();
    for c in candidates {
        if chosen.iter().all(|k| !k.span.overlaps(&c.span)) {
            chosen.push(c);
        }
    }
    chosen.sort_by_key(|c| c.span.start);
    chosen
}

pub fn detect_modal_requests(stream: &TokenStream, modal_words: &[String]) -> Vec<Span> {
    stream
        .tokens
        .iter()
        .enumerate()
        .filter(|(_, t)| modal_words.iter().any(|m| m == *t))
        .map(|(i, _)| Span::new(i, i + 1))
        .collect()
}

/// Reusable linter: compiled preprocessing plus lexicon.
#[derive(Debug, Clone)]
pub struct Linter {
    lexicon: CueLexicon,
    config: LintConfig,
    preprocessor: Preprocessor,
}

impl Linter {
    pub fn new(lexicon: CueLexicon, config: LintConfig) -> Self {
        let preprocessor = Preprocessor::new(config.preprocess.clone());
        Linter {
            lexicon,
            config,
            preprocessor,
        }
    }

    pub fn lexicon(&self) -> &CueLexicon {
        &self.lexicon
    }

    pub fn config(&self) -> &LintConfig {
        &self.config
    }

    pub fn lint(&self, comment: &Comment) -> LintReport {
        let stream = self.preprocessor.preprocess(comment);
        self.lint_stream(&stream)
    }

    pub fn lint_stream(&self, stream: &TokenStream) -> LintReport {
        let cfg = &self.config;
        let code_positions: Vec<usize> = stream
            .tokens
            .iter()
            .enumerate()
            .filter(|(_, t)| *t == CODE_PLACEHOLDER)
            .map(|(i, _)| i)
            .collect();
        let sentence_ids = stream.sentence_ids();
        let near_code = |span: Span| {
            span_near_code(span, &code_positions, &sentence_ids, cfg.window.distance)
        };

        let mut findings = Vec::new();
        let mut categories = BTreeSet::new();
        for cue in detect_cues(stream, &self.lexicon) {
            categories.insert(cue.category);
            let (rule, message) = if near_code(cue.span) {
                (
                    Rule::CueNearCode,
                    format!(
                        "{} cue {:?} is attached to a code reference",
                        cue.category, cue.phrase
                    ),
                )
            } else {
                (
                    Rule::CoherenceCue,
                    format!("{} cue {:?}", cue.category, cue.phrase),
                )
            };
            findings.push(LintFinding {
                rule,
                severity: Severity::Info,
                span: cue.span,
                category: Some(cue.category),
                matched: cue.phrase,
                message,
            });
        }

        let modals = detect_modal_requests(stream, &cfg.modal_words);
        for &span in &modals {
            let word = &stream.tokens[span.start];
            findings.push(LintFinding {
                rule: Rule::ModalRequest,
                severity: Severity::Info,
                span,
                category: None,
                matched: word.clone(),
                message: format!("request/modal word {word:?}"),
            });
        }

        let code_cue_collocations = extract_pairs(stream, &cfg.window)
            .partners
            .iter()
            .filter(|w| self.lexicon.is_single_word_cue(w))
            .count();

        let rationale_flag = code_cue_collocations >= cfg.min_code_cue_collocations.max(1)
            || categories
                .iter()
                .any(|c| cfg.rationale_categories.contains(c));

        if !rationale_flag {
            let message = if code_positions.is_empty() {
                "no reason given; consider explaining why the change is needed".to_string()
            } else {
                "code is referenced without a reason; consider saying why (e.g. \"because\", \"since\", \"if\")"
                    .to_string()
            };
            findings.push(LintFinding {
                rule: Rule::MissingRationale,
                severity: Severity::Advice,
                span: Span::new(0, stream.len()),
                category: None,
                matched: String::new(),
                message,
            });
        }
        findings.sort_by_key(|f| (f.span.start, f.span.end));

        LintReport {
            comment_id: stream.comment_id.clone(),
            tokens: stream.tokens.clone(),
            findings,
            cue_categories_present: categories,
            code_refs: code_positions.len(),
            code_cue_collocations,
            modal_requests: modals.len(),
            rationale_flag,
            lexicon_version: self.lexicon.version().to_string(),
        }
    }
}

fn span_near_code(span: Span, code: &[usize], sentence_ids: &[usize], distance: usize) -> bool {
    (span.start..span.end).any(|t| {
        code.iter().any(|&c| {
            c != t && c.abs_diff(t) <= distance && sentence_ids.get(c) == sentence_ids.get(t)
        })
    })
}

pub fn lint(comment: &Comment, lexicon: &CueLexicon, config: &LintConfig) -> LintReport {
    Linter::new(lexicon.clone(), config.clone()).lint(comment)
}
