//! End-to-end collocation study over a corpus.
//!
//! Output layout under the run's output directory:
//!
//! ```text
//! manifest.json
//! figure.csv, figure.json          all projects
//! <project>/collocations.csv       word,count for every collocated word
//! <project>/collocations.json
//! <project>/ranked.csv             words at or above the frequency filter
//! <project>/inclusion.json
//! <project>/figure.csv, figure.json
//! ```
//!
//! Outputs depend only on the corpus, the settings and the lexicon; the
//! thread count and output location never change a byte.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::analytics::{
    cross_project_intersection, emit_figure_data, inclusion_series, InclusionReport,
    DEFAULT_TOP_KS,
};
use crate::collocation::{build_table, rank, CollocationTable, RankedCollocations, WindowConfig};
use crate::corpus::{Comment, Corpus, CorpusManifest};
use crate::error::{Error, Result};
use crate::lexicon::CueLexicon;
use crate::preprocess::{PreprocessConfig, Preprocessor, TokenStream};

/// Settings that determine the analysis results.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalysisSettings {
    pub preprocess: PreprocessConfig,
    pub window: WindowConfig,
    pub min_frequency: u64,
    pub top_ks: Vec<usize>,
    /// Top-k used for the cross-project cue intersection.
    pub intersection_k: usize,
}

impl Default for AnalysisSettings {
    fn default() -> Self {
        AnalysisSettings {
            preprocess: PreprocessConfig::default(),
            window: WindowConfig::default(),
            min_frequency: 10,
            top_ks: DEFAULT_TOP_KS.to_vec(),
            intersection_k: 200,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Lexicon file; the bundled lexicon when unset.
    pub lexicon: Option<PathBuf>,
    #[serde(flatten)]
    pub settings: AnalysisSettings,
    pub output_dir: PathBuf,
    /// Worker threads; all cores when unset.
    pub threads: Option<usize>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            lexicon: None,
            settings: AnalysisSettings::default(),
            output_dir: PathBuf::from("revcue-out"),
            threads: None,
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn validate(&self) -> Result<()> {
        self.settings.window.validate()?;
        let ks = &self.settings.top_ks;
        if ks.is_empty() || ks[0] == 0 || ks.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config(format!(
                "top_ks must be positive and strictly increasing, got {ks:?}"
            )));
        }
        if self.settings.intersection_k == 0 {
            return Err(Error::Config("intersection_k must be at least 1".into()));
        }
        if self.threads == Some(0) {
            return Err(Error::Config("threads must be at least 1".into()));
        }
        Ok(())
    }

    pub fn load_lexicon(&self) -> Result<CueLexicon> {
        match &self.lexicon {
            Some(path) => CueLexicon::load(path),
            None => Ok(CueLexicon::default_lexicon()),
        }
    }

    pub fn fingerprint(&self) -> String {
        self.settings.fingerprint()
    }
}

impl AnalysisSettings {
    /// Readable summary of the main knobs plus a digest of every setting.
    pub fn fingerprint(&self) -> String {
        let canonical = serde_json::to_vec(self).expect("settings serialize");
        let digest = Sha256::digest(&canonical);
        let hex: String = digest[..4].iter().map(|b| format!("{b:02x}")).collect();
        let ks: Vec<String> = self.top_ks.iter().map(usize::to_string).collect();
        format!(
            "w{}-f{}-k{}-x[{}]-{}-{hex}",
            self.window.distance,
            self.min_frequency,
            ks.join(","),
            self.window.exclusions.join(","),
            if self.window.dedup_per_comment { "dedup" } else { "perpair" },
        )
    }
}

pub fn preprocess_corpus(preprocessor: &Preprocessor, comments: &[Comment]) -> Vec<TokenStream> {
    comments
        .par_iter()
        .map(|c| preprocessor.preprocess(c))
        .collect()
}

/// Token streams grouped by project, in project-name order.
pub fn group_streams(streams: Vec<TokenStream>) -> BTreeMap<String, Vec<TokenStream>> {
    let mut groups: BTreeMap<String, Vec<TokenStream>> = BTreeMap::new();
    for s in streams {
        groups.entry(s.project.clone()).or_default().push(s);
    }
    groups
}

/// Preprocesses and counts every project; tables carry the settings fingerprint.
pub fn collocate_corpus(
    settings: &AnalysisSettings,
    comments: &[Comment],
) -> Result<Vec<(CollocationTable, usize)>> {
    let preprocessor = Preprocessor::new(settings.preprocess.clone());
    let fingerprint = settings.fingerprint();
    let streams = preprocess_corpus(&preprocessor, comments);
    group_streams(streams)
        .into_iter()
        .map(|(project, streams)| {
            let tokens = streams.iter().map(TokenStream::len).sum();
            let mut table = build_table(&streams, &project, &settings.window).map_err(|e| {
                Error::InProject {
                    project: project.clone(),
                    source: Box::new(e),
                }
            })?;
            table.config_fingerprint = fingerprint.clone();
            Ok((table, tokens))
        })
        .collect()
}

pub fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.unwrap_or(0))
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    Ok(pool.install(f))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesPoint {
    pub k: usize,
    pub rate: f64,
    pub hits: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectSummary {
    pub name: String,
    pub dir: String,
    pub comments: usize,
    pub tokens: usize,
    pub total_pairs: u64,
    pub excluded_pairs: u64,
    pub collocated_words: usize,
    pub qualifying_words: usize,
    pub inclusion: Vec<SeriesPoint>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Intersection {
    pub k: usize,
    pub words: BTreeSet<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub format_version: u32,
    pub config_fingerprint: String,
    pub lexicon_version: String,
    pub settings: AnalysisSettings,
    pub corpus: CorpusManifest,
    pub corpus_digest: String,
    pub projects: Vec<ProjectSummary>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub intersection: Option<Intersection>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

/// In-memory results of a run.
#[derive(Debug, Clone)]
pub struct RunResults {
    pub manifest: RunManifest,
    pub tables: Vec<CollocationTable>,
    pub rankings: Vec<RankedCollocations>,
    pub reports: Vec<InclusionReport>,
}

fn corpus_digest(comments: &[Comment]) -> String {
    let mut hasher = Sha256::new();
    for c in comments {
        for field in [&c.id, &c.project, &c.message] {
            hasher.update((field.len() as u64).to_le_bytes());
            hasher.update(field.as_bytes());
        }
    }
    let digest = hasher.finalize();
    let hex: String = digest.iter().map(|b| format!("{b:02x}")).collect();
    format!("sha256:{hex}")
}

/// Directory names safe for any project label; collisions get a numeric suffix.
pub fn project_dirs<'a>(names: impl Iterator<Item = &'a str>) -> Vec<String> {
    let mut used = HashSet::new();
    names
        .map(|name| {
            let mut base: String = name
                .chars()
                .map(|c| {
                    if c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.') {
                        c
                    } else {
                        '_'
                    }
                })
                .collect();
            if base.is_empty() || base.chars().all(|c| c == '.') {
                base = format!("_{}", base.replace('.', "_"));
            }
            let mut dir = base.clone();
            let mut n = 2;
            while !used.insert(dir.to_lowercase()) {
                dir = format!("{base}-{n}");
                n += 1;
            }
            dir
        })
        .collect()
}

/// Computes everything a run produces without touching the filesystem.
pub fn analyze(config: &RunConfig, corpus: &Corpus, lexicon: &CueLexicon) -> Result<RunResults> {
    config.validate()?;
    let settings = &config.settings;
    let counted = with_threads(config.threads, || collocate_corpus(settings, &corpus.comments))??;

    let mut tables = Vec::new();
    let mut rankings = Vec::new();
    let mut reports = Vec::new();
    let mut summaries = Vec::new();
    let mut warnings = Vec::new();
    let comments_per_project: BTreeMap<&str, usize> = corpus
        .manifest
        .projects
        .iter()
        .map(|p| (p.name.as_str(), p.comment_count))
        .collect();
    let dirs = project_dirs(counted.iter().map(|(t, _)| t.project.as_str()));

    for ((table, tokens), dir) in counted.into_iter().zip(dirs) {
        let ranked = rank(&table, settings.min_frequency);
        let report = inclusion_series(&ranked, lexicon, &settings.top_ks).map_err(|e| {
            Error::InProject {
                project: table.project.clone(),
                source: Box::new(e),
            }
        })?;
        warnings.extend(
            report
                .series
                .iter()
                .filter_map(|p| p.warning.clone()),
        );
        summaries.push(ProjectSummary {
            name: table.project.clone(),
            dir,
            comments: comments_per_project
                .get(table.project.as_str())
                .copied()
                .unwrap_or(0),
            tokens,
            total_pairs: table.total_pairs,
            excluded_pairs: table.excluded_pairs,
            collocated_words: table.counts.len(),
            qualifying_words: ranked.len(),
            inclusion: report
                .series
                .iter()
                .map(|p| SeriesPoint {
                    k: p.k,
                    rate: p.rate,
                    hits: p.hits.len(),
                })
                .collect(),
        });
        tables.push(table);
        rankings.push(ranked);
        reports.push(report);
    }

    let intersection = if rankings.len() >= 2 {
        let words = cross_project_intersection(&rankings, lexicon, settings.intersection_k)?;
        Some(Intersection {
            k: settings.intersection_k,
            words,
        })
    } else {
        None
    };

    let manifest = RunManifest {
        format_version: 1,
        config_fingerprint: settings.fingerprint(),
        lexicon_version: lexicon.version().to_string(),
        settings: settings.clone(),
        corpus: corpus.manifest.clone(),
        corpus_digest: corpus_digest(&corpus.comments),
        projects: summaries,
        intersection,
        warnings,
    };
    Ok(RunResults {
        manifest,
        tables,
        rankings,
        reports,
    })
}

fn write_file(path: &Path, bytes: Vec<u8>) -> Result<()> {
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

fn json_bytes<T: Serialize>(value: &T) -> Result<Vec<u8>> {
    let mut bytes = serde_json::to_vec_pretty(value)
        .map_err(|e| Error::Invalid(format!("serializing JSON: {e}")))?;
    bytes.push(b'\n');
    Ok(bytes)
}

/// Writes the collocation table of one project as CSV and JSON.
pub fn write_table(dir: &Path, table: &CollocationTable, min_frequency: u64) -> Result<()> {
    let mut csv = Vec::new();
    table.write_csv(&mut csv)?;
    write_file(&dir.join("collocations.csv"), csv)?;
    let mut export = table.to_export();
    export.min_frequency = min_frequency;
    write_file(&dir.join("collocations.json"), json_bytes(&export)?)
}

/// Runs the study and writes all artifacts under `config.output_dir`.
pub fn run_pipeline(config: &RunConfig, corpus: &Corpus, lexicon: &CueLexicon) -> Result<RunManifest> {
    let results = analyze(config, corpus, lexicon)?;
    let out = &config.output_dir;
    std::fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;

    for (((table, ranked), report), summary) in results
        .tables
        .iter()
        .zip(&results.rankings)
        .zip(&results.reports)
        .zip(&results.manifest.projects)
    {
        let dir = out.join(&summary.dir);
        std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
        write_table(&dir, table, config.settings.min_frequency)?;
        let mut ranked_csv = Vec::new();
        ranked.write_csv(&mut ranked_csv)?;
        write_file(&dir.join("ranked.csv"), ranked_csv)?;
        write_file(&dir.join("inclusion.json"), json_bytes(report)?)?;
        emit_figure_data(std::slice::from_ref(report), &dir.join("figure.csv"))?;
    }
    emit_figure_data(&results.reports, &out.join("figure.csv"))?;
    write_file(&out.join("manifest.json"), json_bytes(&results.manifest)?)?;
    Ok(results.manifest)
}
