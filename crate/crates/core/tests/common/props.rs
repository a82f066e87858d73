//! Strategies and property checks. The checks return `TestCaseError` so
//! they can run under `proptest!` or an explicit `TestRunner`.

use std::collections::{BTreeMap, BTreeSet};

use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestCaseError, TestRng, TestRunner};
use regex::Regex;

use revcue::analytics::inclusion_series;
use revcue::collocation::build_table_sequential;
use revcue::lexicon::CueEntry;
use revcue::preprocess::Preprocessor;
use revcue::{
    build_table, extract_pairs, rank, CollocationTable, Comment, CueLexicon, LintConfig, Linter,
    PreprocessConfig, TokenStream, WindowConfig,
};

use super::{brute_force_pairs, CODE, PATH, SEED, STREAM_WORDS, URL};

pub const CASES: u32 = 1000;

/// Runner with a fixed seed so failures reproduce.
pub fn runner(cases: u32) -> TestRunner {
    let mut seed = [0u8; 32];
    seed[..8].copy_from_slice(&SEED.to_le_bytes());
    TestRunner::new_with_rng(
        Config {
            cases,
            failure_persistence: None,
            ..Config::default()
        },
        TestRng::from_seed(RngAlgorithm::ChaCha, &seed),
    )
}

fn cue_phrases() -> Vec<String> {
    CueLexicon::default_lexicon()
        .entries()
        .map(|e| e.phrase.clone())
        .collect()
}

/// One whitespace-free or short piece of review-comment text.
pub fn piece() -> impl Strategy<Value = String> {
    prop_oneof![
        6 => "[A-Za-z]?[a-z]{1,7}('[a-z]{1,2})?",
        4 => proptest::sample::select(cue_phrases()),
        1 => "[a-z]{1,5}_[a-z0-9]{1,5}",
        1 => "[a-z]{1,4}[A-Z][a-z]{1,4}[A-Z][a-z]{0,4}",
        1 => "[a-z]{1,6}\\([a-z]{0,3}\\)",
        1 => "[a-z]{1,3}\\.[a-z]{1,3}\\.[a-z]{1,3}(\\(\\))?",
        1 => proptest::sample::select(vec!["None", "null", "true", "False", "nullptr"])
            .prop_map(String::from),
        1 => "`[a-z_ .()]{1,12}`",
        1 => "(https?|ftp|ssh|git)://[a-z]{1,8}\\.org(/[a-z0-9?=&]{0,6}){0,2}",
        1 => "(\\.\\./|/|~/)?[a-z]{1,4}(/[a-z]{1,4}){0,2}(\\.[a-z]{1,3})?",
        1 => "[0-9]{1,4}",
        1 => "[,.;:!?()\"'-]{1,2}",
        1 => proptest::sample::select(vec![
            "and/or", "e.g.", "i.e.", "don't", "re-use", "(see", "this).", "x->y", "a::b",
            "...", "--", "#123", "@user", "C++", "O(n)",
        ])
        .prop_map(String::from),
        1 => "\\PC{1,6}",
    ]
}

fn separator() -> impl Strategy<Value = &'static str> {
    proptest::sample::select(vec![" ", " ", " ", " ", "\n", ", ", ". ", "\n\n", "\t"])
}

/// Multi-line review comment text, occasionally with signature lines.
pub fn comment_text() -> impl Strategy<Value = String> {
    (
        proptest::collection::vec((piece(), separator()), 0..40),
        proptest::option::weighted(0.15, Just("Signed-off-by: Dev <dev@example.org>")),
        proptest::option::weighted(0.1, Just("Patch Set 2: Code-Review+1")),
    )
        .prop_map(|(parts, sig, vote)| {
            let mut text = String::new();
            if let Some(v) = vote {
                text.push_str(v);
                text.push_str("\n\n");
            }
            for (p, sep) in parts {
                text.push_str(&p);
                text.push_str(sep);
            }
            if let Some(s) = sig {
                text.push('\n');
                text.push_str(s);
            }
            text
        })
}

/// Prose without code, URIs, paths or signature lines.
pub fn plain_text() -> impl Strategy<Value = String> {
    let word = "[A-Za-z]?[a-z]{0,7}('[a-z]{1,2})?"
        .prop_filter("nonempty word", |w| !w.is_empty())
        .prop_filter("not a literal keyword", |w| {
            !matches!(
                w.to_lowercase().as_str(),
                "none" | "null" | "true" | "false" | "nullptr"
            )
        });
    let punct = proptest::sample::select(vec!["", "", "", ",", ".", "!", "?", ";", ":", "\""]);
    let lead = proptest::sample::select(vec!["", "", "", "(", "\"", "'"]);
    proptest::collection::vec((lead, word, punct, separator()), 0..40).prop_map(|parts| {
        parts
            .into_iter()
            .map(|(l, w, p, s)| format!("{l}{w}{p}{s}"))
            .collect()
    })
}

/// Token vector over the stream alphabet, with placeholders.
pub fn tokens(max: usize) -> impl Strategy<Value = Vec<String>> {
    let alphabet: Vec<String> = STREAM_WORDS
        .iter()
        .chain([CODE, CODE, CODE, URL, PATH].iter())
        .map(|s| s.to_string())
        .collect();
    proptest::collection::vec(proptest::sample::select(alphabet), 0..=max)
}

fn project_streams(texts: &[String], pre: &Preprocessor) -> Vec<TokenStream> {
    texts
        .iter()
        .enumerate()
        .map(|(i, t)| pre.preprocess(&Comment::new(format!("c{i}"), "p", t.as_str())))
        .collect()
}

fn token_streams(streams: &[Vec<String>]) -> Vec<TokenStream> {
    streams
        .iter()
        .enumerate()
        .map(|(i, t)| TokenStream {
            comment_id: format!("s{i}"),
            project: "p".into(),
            tokens: t.clone(),
            sentence_starts: Vec::new(),
        })
        .collect()
}

fn preprocessor() -> Preprocessor {
    Preprocessor::new(PreprocessConfig::default())
}

// ---- preprocessing ----

pub fn idempotent_preprocessing(text: &str) -> Result<(), TestCaseError> {
    let pre = preprocessor();
    let first = pre.preprocess_text(text);
    let stream = TokenStream::new("c", "p", first.clone());
    let second = pre.preprocess_text(&stream.render());
    prop_assert_eq!(&first.tokens, &second.tokens, "rendered: {:?}", stream.render());
    Ok(())
}

fn uri_like() -> &'static Regex {
    static RE: std::sync::OnceLock<Regex> = std::sync::OnceLock::new();
    RE.get_or_init(|| Regex::new(r"(?i)(https?|ftp|ssh|git)://").unwrap())
}

/// Path rule restated: a separator, a letter, and either two separators or
/// a file extension on the last segment.
fn path_like(token: &str) -> bool {
    let seps = token.matches(['/', '\\']).count();
    if seps == 0 || !token.chars().any(char::is_alphabetic) || token.contains("://") {
        return false;
    }
    let last = token.rsplit(['/', '\\']).next().unwrap();
    let ext = last
        .rsplit_once('.')
        .is_some_and(|(stem, ext)| {
            !stem.is_empty() && (1..=10).contains(&ext.len()) && ext.chars().all(|c| c.is_ascii_alphanumeric())
        });
    seps >= 2 || ext
}

pub fn placeholder_soundness(text: &str) -> Result<(), TestCaseError> {
    let out = preprocessor().preprocess_text(text);
    for t in &out.tokens {
        prop_assert!(!t.is_empty() && !t.chars().any(char::is_whitespace), "bad token {t:?}");
        if [CODE, URL, PATH].contains(&t.as_str()) {
            continue;
        }
        prop_assert!(!uri_like().is_match(t), "URI survived: {t:?}");
        prop_assert!(!path_like(t), "path survived: {t:?}");
        prop_assert_eq!(t.to_lowercase(), t.clone(), "word not lowercased");
    }
    Ok(())
}

pub fn no_stop_word_loss(text: &str) -> Result<(), TestCaseError> {
    let expected: Vec<String> = text
        .split_whitespace()
        .map(|w| w.trim_matches(|c: char| !c.is_alphanumeric()).to_lowercase())
        .filter(|w| !w.is_empty())
        .collect();
    let got = preprocessor().preprocess_text(text).tokens;
    prop_assert_eq!(got, expected);
    Ok(())
}

pub fn deterministic_preprocessing(text: &str) -> Result<(), TestCaseError> {
    let a = preprocessor().preprocess_text(text);
    let b = Preprocessor::new(PreprocessConfig::default()).preprocess_text(text);
    prop_assert_eq!(a, b);
    Ok(())
}

// ---- collocation ----

pub fn oracle_equivalence(tokens: &[String], distance: usize) -> Result<(), TestCaseError> {
    let cfg = WindowConfig {
        distance,
        ..WindowConfig::default()
    };
    let stream = TokenStream::from_tokens(tokens.to_vec());
    let got = super::library_pairs(&stream, &cfg);
    prop_assert_eq!(got, brute_force_pairs(tokens, distance, &["a", "an"]));
    Ok(())
}

/// Any partition of the corpus, tabulated per part and merged, equals the
/// sequential table; so does the parallel build.
pub fn partition_invariance(texts: &[String], cuts: &[usize]) -> Result<(), TestCaseError> {
    let cfg = WindowConfig::default();
    let streams = project_streams(texts, &preprocessor());
    let sequential = build_table_sequential(&streams, "p", &cfg).unwrap();

    let mut bounds: Vec<usize> = cuts.iter().map(|c| c % (streams.len() + 1)).collect();
    bounds.push(0);
    bounds.push(streams.len());
    bounds.sort_unstable();
    let mut merged = CollocationTable::empty("p", &cfg);
    for w in bounds.windows(2) {
        let part = build_table(&streams[w[0]..w[1]], "p", &cfg).unwrap();
        merged.merge(part).unwrap();
    }
    prop_assert_eq!(&merged, &sequential);

    let mut reversed = streams.clone();
    reversed.reverse();
    prop_assert_eq!(&build_table(&reversed, "p", &cfg).unwrap(), &sequential);

    let total: u64 = sequential.counts.values().sum::<u64>() + sequential.excluded_pairs;
    prop_assert_eq!(total, sequential.total_pairs);
    Ok(())
}

pub fn filter_soundness(streams: &[Vec<String>], min: u64) -> Result<(), TestCaseError> {
    let cfg = WindowConfig::default();
    let table = build_table(&token_streams(streams), "p", &cfg).unwrap();
    let ranked = rank(&table, min);
    for w in &ranked.ranked {
        prop_assert!(w.count >= min);
        prop_assert!(![CODE, URL, PATH, "a", "an"].contains(&w.word.as_str()));
    }
    for pair in ranked.ranked.windows(2) {
        let (x, y) = (&pair[0], &pair[1]);
        prop_assert!(
            x.count > y.count || (x.count == y.count && x.word < y.word),
            "order broken at {:?}",
            pair
        );
    }
    let expected = table.counts.iter().filter(|(_, &c)| c >= min).count();
    prop_assert_eq!(ranked.len(), expected);

    let all = rank(&table, 0);
    let words: BTreeSet<&str> = all.words().collect();
    let keys: BTreeSet<&str> = table.counts.keys().map(String::as_str).collect();
    prop_assert_eq!(words, keys);
    Ok(())
}

pub fn window_monotonicity(tokens: &[String]) -> Result<(), TestCaseError> {
    let stream = TokenStream::from_tokens(tokens.to_vec());
    let mut prev: BTreeMap<String, u64> = BTreeMap::new();
    for distance in 1..=5 {
        let cfg = WindowConfig {
            distance,
            ..WindowConfig::default()
        };
        let (counts, _) = super::library_pairs(&stream, &cfg);
        for (w, &n) in &prev {
            prop_assert!(counts.get(w).copied().unwrap_or(0) >= n, "{w} shrank at {distance}");
        }
        prev = counts;
    }
    Ok(())
}

// ---- analytics ----

/// Adding lexicon entries never lowers an inclusion rate.
pub fn monotone_lexicon_growth(
    streams: &[Vec<String>],
    keep: &[bool],
    extra: &[String],
) -> Result<(), TestCaseError> {
    let table = build_table(&token_streams(streams), "p", &WindowConfig::default()).unwrap();
    let ranked = rank(&table, 1);
    let all: Vec<CueEntry> = CueLexicon::default_lexicon().entries().cloned().collect();
    let small: Vec<CueEntry> = all
        .iter()
        .zip(keep.iter().cycle())
        .filter(|(_, &k)| k)
        .map(|(e, _)| e.clone())
        .collect();
    let mut large = all.clone();
    large.extend(
        extra
            .iter()
            .filter_map(|w| CueEntry::new(w, revcue::Category::Similarity))
            .filter(|e| !all.iter().any(|a| a.phrase == e.phrase)),
    );
    let small = CueLexicon::from_entries(small, "small");
    let large = CueLexicon::from_entries(large, "large");
    let ks = [1, 2, 3, 5, 8, 13];
    let lo = inclusion_series(&ranked, &small, &ks).unwrap();
    let hi = inclusion_series(&ranked, &large, &ks).unwrap();
    for (a, b) in lo.series.iter().zip(&hi.series) {
        prop_assert!(b.rate >= a.rate, "k={} {} < {}", a.k, b.rate, a.rate);
        for p in [a, b] {
            prop_assert!((0.0..=1.0).contains(&p.rate));
            prop_assert_eq!(p.hits.len() as f64, (p.rate * p.k as f64).round());
        }
    }
    Ok(())
}

// ---- linter ----

pub fn lint_determinism(text: &str) -> Result<(), TestCaseError> {
    let comment = Comment::new("c", "p", text);
    let linter = Linter::new(CueLexicon::default_lexicon(), LintConfig::default());
    let a = linter.lint(&comment);
    let b = linter.lint(&comment);
    let c = revcue::lint(&comment, &CueLexicon::default_lexicon(), &LintConfig::default());
    prop_assert_eq!(&a, &b);
    prop_assert_eq!(&a, &c);
    prop_assert_eq!(a.diagnostics(), c.diagnostics());
    Ok(())
}

/// Finding spans are valid and cover exactly the triggering phrase; the
/// cue-code count equals the pair extractor restricted to cue words.
pub fn lint_consistency(text: &str) -> Result<(), TestCaseError> {
    let lexicon = CueLexicon::default_lexicon();
    let config = LintConfig::default();
    let report = revcue::lint(&Comment::new("c", "p", text), &lexicon, &config);
    let tokens = &report.tokens;
    for f in &report.findings {
        prop_assert!(f.span.start <= f.span.end && f.span.end <= tokens.len().max(1));
        prop_assert_eq!(f.category.is_some(), f.rule.is_cue_rule());
        if f.rule.is_cue_rule() {
            let covered = tokens[f.span.start..f.span.end].join(" ");
            prop_assert_eq!(&covered, &f.matched);
            prop_assert_eq!(lexicon.lookup(&covered), f.category);
        }
        if f.rule == revcue::lint::Rule::ModalRequest {
            prop_assert_eq!(f.span.len(), 1);
            prop_assert!(config.modal_words.contains(&tokens[f.span.start]));
        }
    }
    let stream = TokenStream::from_tokens(tokens.clone());
    let pairs = extract_pairs(&stream, &config.window);
    let expected = pairs
        .partners
        .iter()
        .filter(|w| lexicon.is_single_word_cue(w))
        .count();
    prop_assert_eq!(report.code_cue_collocations, expected);
    prop_assert_eq!(report.code_refs, tokens.iter().filter(|t| *t == CODE).count());
    let strong = report.cue_categories_present.iter().any(|c| {
        matches!(
            c,
            revcue::Category::Causality | revcue::Category::Hypothesis | revcue::Category::Contrast
        )
    });
    prop_assert_eq!(report.rationale_flag, expected >= 1 || strong);
    Ok(())
}

/// Appending unrelated text on a new line keeps every earlier cue finding.
pub fn monotone_detection(text: &str, tail: &str) -> Result<(), TestCaseError> {
    let lexicon = CueLexicon::default_lexicon();
    let config = LintConfig::default();
    let before = revcue::lint(&Comment::new("c", "p", text), &lexicon, &config);
    let after = revcue::lint(
        &Comment::new("c", "p", format!("{text}\n{tail}")),
        &lexicon,
        &config,
    );
    prop_assume!(after.tokens.starts_with(&before.tokens));
    let boundary = before.tokens.len();
    for f in before.findings.iter().filter(|f| f.rule.is_cue_rule() && f.span.end < boundary) {
        prop_assert!(
            after.findings.iter().any(|g| g.rule.is_cue_rule() && g.span == f.span && g.matched == f.matched),
            "lost {:?}",
            f
        );
    }
    Ok(())
}

// ---- suites for the acceptance gate ----

pub type Suite = fn(&mut TestRunner) -> Result<(), String>;

fn report<T: std::fmt::Debug>(
    r: Result<(), proptest::test_runner::TestError<T>>,
) -> Result<(), String> {
    r.map_err(|e| e.to_string())
}

pub fn acceptance_suites() -> Vec<(&'static str, Suite)> {
    vec![
        ("idempotent preprocessing", |r| {
            report(r.run(&comment_text(), |t| idempotent_preprocessing(&t)))
        }),
        ("placeholder soundness", |r| {
            report(r.run(&comment_text(), |t| placeholder_soundness(&t)))
        }),
        ("additivity/partition invariance", |r| {
            let s = (
                proptest::collection::vec(comment_text(), 0..12),
                proptest::collection::vec(any::<usize>(), 0..4),
            );
            report(r.run(&s, |(texts, cuts)| partition_invariance(&texts, &cuts)))
        }),
        ("filter soundness", |r| {
            let s = (proptest::collection::vec(tokens(50), 0..20), 0u64..6);
            report(r.run(&s, |(streams, min)| filter_soundness(&streams, min)))
        }),
        ("monotone lexicon growth", |r| {
            let s = (
                proptest::collection::vec(tokens(50), 0..20),
                proptest::collection::vec(any::<bool>(), 1..50),
                proptest::collection::vec("[a-z]{1,4}|value|call|the|is|we", 0..6),
            );
            report(r.run(&s, |(streams, keep, extra)| {
                monotone_lexicon_growth(&streams, &keep, &extra)
            }))
        }),
        ("lint determinism", |r| {
            report(r.run(&comment_text(), |t| lint_determinism(&t)))
        }),
    ]
}
