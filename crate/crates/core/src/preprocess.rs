//! Review message preprocessing.
//!
//! A message goes through three stages: signature/vote lines are dropped,
//! non-natural-language spans are replaced by typed placeholders, and the
//! remaining text is split into lowercase word tokens. Stop words are kept
//! and nothing is stemmed.
//!
//! Every detector looks at the same trimmed "core" of a whitespace-delimited
//! chunk that the tokenizer emits, which is what makes preprocessing
//! idempotent when a [`TokenStream`] is rendered back to text.

use std::borrow::Cow;
use std::collections::HashSet;
use std::fmt;
use std::sync::OnceLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

pub const CODE_PLACEHOLDER: &str = "CODETOK";
pub const URL_PLACEHOLDER: &str = "URLTOK";
pub const PATH_PLACEHOLDER: &str = "PATHTOK";

pub fn is_placeholder(token: &str) -> bool {
    matches!(token, CODE_PLACEHOLDER | URL_PLACEHOLDER | PATH_PLACEHOLDER)
}

/// Abbreviations whose trailing period does not end a sentence.
const ABBREVIATIONS: &[&str] = &["e.g", "i.e", "etc", "vs", "cf", "approx", "resp", "no"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CodeDetectors {
    pub backticks: bool,
    pub snake_case: bool,
    pub camel_case: bool,
    pub calls: bool,
    pub dotted_chains: bool,
    pub literals: bool,
}

impl Default for CodeDetectors {
    fn default() -> Self {
        CodeDetectors {
            backticks: true,
            snake_case: true,
            camel_case: true,
            calls: true,
            dotted_chains: true,
            literals: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PreprocessConfig {
    /// Lines starting with `<key>:` are dropped (case-insensitive).
    pub signature_keys: Vec<String>,
    /// Drop Gerrit vote lines such as `Patch Set 2: Code-Review+2` or `Verified+1`.
    pub strip_vote_lines: bool,
    pub detectors: CodeDetectors,
    /// Matched case-insensitively against whole tokens.
    pub literal_keywords: Vec<String>,
    /// Record sentence starts so collocation windows stop at `.`, `!` and `?`.
    pub sentence_boundaries: bool,
    /// Replace a whole line by one code placeholder when most of its tokens are code.
    pub collapse_code_lines: bool,
    pub code_line_threshold: f64,
}

impl Default for PreprocessConfig {
    fn default() -> Self {
        PreprocessConfig {
            signature_keys: [
                "Author-Id",
                "Signed-off-by",
                "Change-Id",
                "Reviewed-by",
                "Tested-by",
                "Reviewed-on",
            ]
            .map(String::from)
            .to_vec(),
            strip_vote_lines: true,
            detectors: CodeDetectors::default(),
            literal_keywords: ["None", "null", "true", "false", "nullptr"]
                .map(String::from)
                .to_vec(),
            sentence_boundaries: false,
            collapse_code_lines: true,
            code_line_threshold: 0.8,
        }
    }
}

/// A preprocessed comment: lowercase word tokens and uppercase placeholders.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenStream {
    pub comment_id: String,
    pub project: String,
    pub tokens: Vec<String>,
    /// Token indices that begin a new sentence (only when sentence boundaries are enabled).
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub sentence_starts: Vec<usize>,
}

impl TokenStream {
    pub fn new(comment_id: impl Into<String>, project: impl Into<String>, tokens: Tokens) -> Self {
        TokenStream {
            comment_id: comment_id.into(),
            project: project.into(),
            tokens: tokens.tokens,
            sentence_starts: tokens.sentence_starts,
        }
    }

    /// Bare stream without identifiers or sentence information.
    pub fn from_tokens<S: Into<String>>(tokens: impl IntoIterator<Item = S>) -> Self {
        TokenStream {
            comment_id: String::new(),
            project: String::new(),
            tokens: tokens.into_iter().map(Into::into).collect(),
            sentence_starts: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    /// Sentence number of each token; all zeros when no boundaries are recorded.
    pub fn sentence_ids(&self) -> Vec<usize> {
        (0..self.tokens.len())
            .map(|i| {
                self.sentence_starts
                    .iter()
                    .filter(|&&s| s > 0 && s <= i)
                    .count()
            })
            .collect()
    }

    /// Renders the stream as text that preprocesses back to the same stream.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for (i, tok) in self.tokens.iter().enumerate() {
            if i > 0 {
                if self.sentence_starts.binary_search(&i).is_ok() {
                    out.push('.');
                }
                out.push(' ');
            }
            out.push_str(tok);
        }
        out
    }
}

impl fmt::Display for TokenStream {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Tokens {
    pub tokens: Vec<String>,
    pub sentence_starts: Vec<usize>,
}

/// A non-fatal problem noticed while preprocessing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Warning {
    pub source: String,
    pub message: String,
}

impl fmt::Display for Warning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "warning: {}: {}", self.source, self.message)
    }
}

struct Patterns {
    uri: Regex,
    fenced: Regex,
    backtick: Regex,
    vote: Regex,
    call: Regex,
    not_call: Regex,
}

fn patterns() -> &'static Patterns {
    static PATTERNS: OnceLock<Patterns> = OnceLock::new();
    PATTERNS.get_or_init(|| Patterns {
        uri: Regex::new(r"(?i)\b(?:https?|ftp|ssh|git)://\S+").unwrap(),
        fenced: Regex::new(r"(?s)```.*?```").unwrap(),
        backtick: Regex::new(r"`[^`\n]+`").unwrap(),
        vote: Regex::new(
            r"^\s*(?:Patch Set \d+:(?:\s+[A-Z][A-Za-z-]*[+-]\d+)*|[A-Z][A-Za-z-]*[+-]\d+(?:\s+[A-Z][A-Za-z-]*[+-]\d+)*)\s*$",
        )
        .unwrap(),
        call: Regex::new(r"^[A-Za-z_$][A-Za-z0-9_$.:>-]*\(").unwrap(),
        not_call: Regex::new(r"^[A-Za-z]+\([A-Za-z]{1,2}\)?$").unwrap(),
    })
}

/// Compiled preprocessing configuration.
#[derive(Debug, Clone)]
pub struct Preprocessor {
    config: PreprocessConfig,
    signature_keys: Vec<String>,
    literals: HashSet<String>,
}

impl Default for Preprocessor {
    fn default() -> Self {
        Self::new(PreprocessConfig::default())
    }
}

impl Preprocessor {
    pub fn new(config: PreprocessConfig) -> Self {
        let signature_keys = config
            .signature_keys
            .iter()
            .map(|k| k.trim().to_lowercase())
            .filter(|k| !k.is_empty())
            .collect();
        let literals = config
            .literal_keywords
            .iter()
            .map(|k| k.trim().to_lowercase())
            .filter(|k| !k.is_empty())
            .collect();
        Preprocessor {
            config,
            signature_keys,
            literals,
        }
    }

    pub fn config(&self) -> &PreprocessConfig {
        &self.config
    }

    pub fn strip_signatures(&self, message: &str) -> String {
        message
            .split('\n')
            .filter(|line| !self.is_signature_line(line))
            .collect::<Vec<_>>()
            .join("\n")
    }

    fn is_signature_line(&self, line: &str) -> bool {
        let body = line.trim_start_matches(|c: char| !c.is_alphanumeric());
        let lower = body.to_lowercase();
        let keyed = self.signature_keys.iter().any(|key| {
            lower
                .strip_prefix(key.as_str())
                .is_some_and(|rest| rest.trim_start().starts_with(':'))
        });
        keyed || (self.config.strip_vote_lines && patterns().vote.is_match(line))
    }

    /// Replaces URIs, then paths, then code spans with placeholders.
    pub fn substitute_placeholders(&self, message: &str) -> String {
        let p = patterns();
        let text = p.uri.replace_all(message, |caps: &regex::Captures<'_>| {
            let m = caps.get(0).unwrap();
            let uri = trim_uri(m.as_str());
            let tail = &m.as_str()[uri.len()..];
            format!("{URL_PLACEHOLDER}{tail}")
        });
        let text = pad_placeholders(&text);
        let (text, _) = map_chunks(&text, |chunk| self.replace_path(chunk).map(|c| (c, false)));

        let text = if self.config.detectors.backticks {
            p.fenced
                .replace_all(&text, |caps: &regex::Captures<'_>| {
                    replace_backtick_span(caps.get(0).unwrap().as_str())
                })
                .into_owned()
        } else {
            text
        };

        let lines: Vec<String> = text.split('\n').map(|l| self.substitute_line(l)).collect();
        lines.join("\n")
    }

    fn substitute_line(&self, line: &str) -> String {
        let p = patterns();
        let mut fresh = 0usize;
        let line: Cow<'_, str> = if self.config.detectors.backticks {
            p.backtick.replace_all(line, |caps: &regex::Captures<'_>| {
                let span = caps.get(0).unwrap().as_str();
                let out = replace_backtick_span(span);
                if out != span {
                    fresh += 1;
                }
                out
            })
        } else {
            Cow::Borrowed(line)
        };
        let line = pad_placeholders(&line);
        let (line, detected) = map_chunks(&line, |chunk| {
            let (lead, core, trail) = split_core(chunk);
            if core.is_empty() || is_placeholder(core) || !self.is_code(core) {
                return None;
            }
            Some((format!("{lead}{CODE_PLACEHOLDER}{trail}"), true))
        });
        fresh += detected;

        if self.config.collapse_code_lines && fresh > 0 {
            let tokens = line
                .split_whitespace()
                .filter(|c| !split_core(c).1.is_empty())
                .count();
            if tokens >= 2 && fresh as f64 >= self.config.code_line_threshold * tokens as f64 {
                return CODE_PLACEHOLDER.to_string();
            }
        }
        line
    }

    fn replace_path(&self, chunk: &str) -> Option<String> {
        let (lead, candidate, trail) = split_path_candidate(chunk);
        if !is_path(candidate) {
            return None;
        }
        Some(format!("{lead}{PATH_PLACEHOLDER}{trail}"))
    }

    /// True when a chunk core looks like a source code element.
    pub fn is_code(&self, core: &str) -> bool {
        let d = &self.config.detectors;
        (d.snake_case && is_snake_case(core))
            || (d.camel_case && is_camel_case(core))
            || (d.calls && is_call(core))
            || (d.dotted_chains && is_dotted_chain(core))
            || (d.literals && self.literals.contains(&core.to_lowercase()))
    }

    pub fn tokenize(&self, text: &str) -> Tokens {
        let track = self.config.sentence_boundaries;
        let mut out = Tokens::default();
        let mut pending = false;
        for chunk in text.split_whitespace() {
            let (_, core, trail) = split_core(chunk);
            if core.is_empty() {
                pending |= track && ends_sentence(chunk) && !out.tokens.is_empty();
                continue;
            }
            if pending {
                out.sentence_starts.push(out.tokens.len());
            }
            let token = if is_placeholder(core) {
                core.to_string()
            } else {
                core.to_lowercase()
            };
            pending = track && ends_sentence(trail) && !ABBREVIATIONS.contains(&token.as_str());
            out.tokens.push(token);
        }
        out
    }

    pub fn preprocess_text(&self, message: &str) -> Tokens {
        let stripped = self.strip_signatures(message);
        let substituted = self.substitute_placeholders(&stripped);
        self.tokenize(&substituted)
    }

    pub fn preprocess(&self, comment: &crate::Comment) -> TokenStream {
        TokenStream::new(
            comment.id.clone(),
            comment.project.clone(),
            self.preprocess_text(&comment.message),
        )
    }

    /// Preprocesses raw bytes, replacing malformed UTF-8 and reporting it.
    pub fn preprocess_bytes(
        &self,
        id: &str,
        project: &str,
        message: &[u8],
    ) -> (TokenStream, Option<Warning>) {
        let text = String::from_utf8_lossy(message);
        let warning = match text {
            Cow::Owned(_) => Some(Warning {
                source: id.to_string(),
                message: "malformed UTF-8 replaced with U+FFFD".to_string(),
            }),
            Cow::Borrowed(_) => None,
        };
        let tokens = self.preprocess_text(&text);
        (TokenStream::new(id, project, tokens), warning)
    }
}

fn ends_sentence(trail: &str) -> bool {
    trail.contains(['.', '!', '?'])
}

fn trim_uri(uri: &str) -> &str {
    let mut end = uri.len();
    loop {
        let s = &uri[..end];
        let Some(c) = s.chars().last() else { break };
        let strip = match c {
            '.' | ',' | ';' | ':' | '!' | '?' | '\'' | '"' | '>' | ']' | '}' | '`' => true,
            ')' => s.matches('(').count() < s.matches(')').count(),
            _ => false,
        };
        if !strip {
            break;
        }
        end -= c.len_utf8();
    }
    &uri[..end]
}

fn replace_backtick_span(span: &str) -> String {
    let inner = span.trim_matches('`');
    if inner.split_whitespace().all(is_placeholder) && !inner.trim().is_empty() {
        return span.to_string();
    }
    CODE_PLACEHOLDER.to_string()
}

/// Ensures every placeholder occurrence is separated from adjacent word characters.
fn pad_placeholders(text: &str) -> String {
    let mut out = String::with_capacity(text.len() + 8);
    let mut rest = text;
    while let Some((pos, ph)) = [CODE_PLACEHOLDER, URL_PLACEHOLDER, PATH_PLACEHOLDER]
        .iter()
        .filter_map(|ph| rest.find(ph).map(|p| (p, *ph)))
        .min()
    {
        let before = &rest[..pos];
        out.push_str(before);
        let prev = out.chars().last();
        if prev.is_some_and(|c| c.is_alphanumeric() || c == '_') {
            out.push(' ');
        }
        out.push_str(ph);
        rest = &rest[pos + ph.len()..];
        if rest
            .chars()
            .next()
            .is_some_and(|c| c.is_alphanumeric() || c == '_')
        {
            out.push(' ');
        }
    }
    out.push_str(rest);
    out
}

/// Rewrites each whitespace-delimited chunk with `f`, keeping all whitespace.
/// Returns the new text and the number of chunks flagged by `f`.
fn map_chunks<F>(text: &str, mut f: F) -> (String, usize)
where
    F: FnMut(&str) -> Option<(String, bool)>,
{
    let mut out = String::with_capacity(text.len());
    let mut flagged = 0;
    let mut start = None;
    for (i, c) in text.char_indices() {
        if c.is_whitespace() {
            if let Some(s) = start.take() {
                push_chunk(&mut out, &text[s..i], &mut f, &mut flagged);
            }
            out.push(c);
        } else if start.is_none() {
            start = Some(i);
        }
    }
    if let Some(s) = start {
        push_chunk(&mut out, &text[s..], &mut f, &mut flagged);
    }
    (out, flagged)
}

fn push_chunk<F>(out: &mut String, chunk: &str, f: &mut F, flagged: &mut usize)
where
    F: FnMut(&str) -> Option<(String, bool)>,
{
    match f(chunk) {
        Some((replacement, flag)) => {
            out.push_str(&replacement);
            if flag {
                *flagged += 1;
            }
        }
        None => out.push_str(chunk),
    }
}

fn is_word_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_'
}

/// Splits a chunk into leading punctuation, core, trailing punctuation.
///
/// The core starts with a word character and ends with one, or with a `)`
/// that closes a `(` inside the core.
pub(crate) fn split_core(chunk: &str) -> (&str, &str, &str) {
    let start = chunk
        .char_indices()
        .find(|&(_, c)| is_word_char(c))
        .map_or(chunk.len(), |(i, _)| i);
    let body = &chunk[start..];
    let mut end = body.len();
    loop {
        let s = &body[..end];
        let Some(c) = s.chars().last() else { break };
        let keep = is_word_char(c)
            || (c == ')' && s.matches('(').count() >= s.matches(')').count());
        if keep {
            break;
        }
        end -= c.len_utf8();
    }
    (&chunk[..start], &body[..end], &body[end..])
}

/// Like [`split_core`] but keeps leading `/`, `~` and `.` and trailing
/// separators so absolute, relative and directory paths survive.
fn split_path_candidate(chunk: &str) -> (&str, &str, &str) {
    let (_, core, trail) = split_core(chunk);
    let seps = trail.len() - trail.trim_start_matches(['/', '\\']).len();
    let core_end = chunk.len() - trail.len() + seps;
    let trail = &chunk[core_end..];
    let start = chunk[..core_end]
        .char_indices()
        .find(|&(_, c)| is_word_char(c) || matches!(c, '/' | '~' | '.' | '\\'))
        .map_or(core_end, |(i, _)| i);
    let candidate = &chunk[start..core_end];
    if core.is_empty() {
        return (chunk, "", "");
    }
    (&chunk[..start], candidate, trail)
}

pub(crate) fn is_path(candidate: &str) -> bool {
    if candidate.is_empty() || is_placeholder(candidate) || candidate.contains("://") {
        return false;
    }
    if !candidate.chars().any(|c| c.is_alphabetic()) {
        return false;
    }
    let seps = candidate.matches(['/', '\\']).count();
    if seps == 0 {
        return false;
    }
    seps >= 2 || has_extension(candidate)
}

fn has_extension(candidate: &str) -> bool {
    let last = candidate.rsplit(['/', '\\']).next().unwrap_or("");
    match last.rsplit_once('.') {
        Some((stem, ext)) => {
            !stem.is_empty()
                && (1..=10).contains(&ext.len())
                && ext.chars().all(|c| c.is_ascii_alphanumeric())
        }
        None => false,
    }
}

fn is_snake_case(core: &str) -> bool {
    core.contains('_')
        && core.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
        && core.chars().any(|c| c.is_ascii_alphabetic())
}

/// camelCase / PascalCase identifier with at least two humps, i.e. at least
/// three case segments (`getFullName`, `XMLHttpRequest`).
fn is_camel_case(core: &str) -> bool {
    let chars: Vec<char> = core.chars().collect();
    if !chars.first().is_some_and(|c| c.is_ascii_alphabetic())
        || !chars.iter().all(|c| c.is_ascii_alphanumeric())
        || !chars.iter().any(|c| c.is_ascii_lowercase())
    {
        return false;
    }
    let humps = (1..chars.len())
        .filter(|&i| {
            let (prev, cur) = (chars[i - 1], chars[i]);
            cur.is_ascii_uppercase()
                && (prev.is_ascii_lowercase()
                    || prev.is_ascii_digit()
                    || (prev.is_ascii_uppercase()
                        && chars.get(i + 1).is_some_and(|n| n.is_ascii_lowercase())))
        })
        .count();
    humps >= 2
}

fn is_call(core: &str) -> bool {
    let p = patterns();
    p.call.is_match(core) && !p.not_call.is_match(core)
}

fn is_dotted_chain(core: &str) -> bool {
    fn ident(s: &str) -> bool {
        let mut chars = s.chars();
        chars
            .next()
            .is_some_and(|c| c.is_ascii_alphabetic() || c == '_')
            && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
    }
    let dotted = core.split('.').collect::<Vec<_>>();
    if dotted.len() >= 3 && dotted.iter().all(|s| ident(s)) {
        return true;
    }
    let qualified = core.split("::").collect::<Vec<_>>();
    qualified.len() >= 2 && qualified.iter().all(|s| ident(s))
}

static DEFAULT: OnceLock<Preprocessor> = OnceLock::new();

fn default_preprocessor() -> &'static Preprocessor {
    DEFAULT.get_or_init(Preprocessor::default)
}

/// [`Preprocessor::strip_signatures`] with the default configuration.
pub fn strip_signatures(message: &str) -> String {
    default_preprocessor().strip_signatures(message)
}

/// [`Preprocessor::substitute_placeholders`] with the default configuration.
pub fn substitute_placeholders(message: &str) -> String {
    default_preprocessor().substitute_placeholders(message)
}

/// [`Preprocessor::tokenize`] with the default configuration.
pub fn tokenize(message: &str) -> Vec<String> {
    default_preprocessor().tokenize(message).tokens
}

pub fn preprocess(comment: &crate::Comment, config: &PreprocessConfig) -> TokenStream {
    Preprocessor::new(config.clone()).preprocess(comment)
}
