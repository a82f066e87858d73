//! Coherence cues in code review comments.
//!
//! The crate has two faces. The corpus side preprocesses review messages
//! (code, URIs and paths become placeholders; stop words are kept), counts
//! the words that occur within two tokens of a code reference, ranks them,
//! and measures how many of the top-ranked words are coherence cues such as
//! "because", "if" or "instead". The linter side checks a single comment
//! for cue phrases, request modals and cue words attached to code, and
//! raises a rationale flag.

pub mod analytics;
pub mod collocation;
pub mod corpus;
pub mod error;
pub mod fetch;
pub mod lexicon;
pub mod lint;
pub mod pipeline;
pub mod preprocess;

pub use analytics::{
    cross_project_intersection, emit_figure_data, inclusion_rate, inclusion_series,
    InclusionPoint, InclusionReport,
};
pub use collocation::{
    build_table, extract_pairs, rank, rank_of, CollocationTable, RankedCollocations, WindowConfig,
};
pub use corpus::{read_corpus, Comment, Corpus, CorpusFormat, CorpusManifest};
pub use error::{Error, LexiconError, Result};
pub use fetch::{fetch_remote, FetchConfig, FetchOutcome};
pub use lexicon::{Category, CueEntry, CueLexicon};
pub use lint::{lint, LintConfig, LintFinding, LintReport, Linter};
pub use pipeline::{run_pipeline, AnalysisSettings, RunConfig, RunManifest};
pub use preprocess::{preprocess, PreprocessConfig, Preprocessor, TokenStream};
