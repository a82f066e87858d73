use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use revcue::collocation::{rank, CollocationTable, TableExport};
use revcue::corpus::{read_corpus, write_jsonl, Comment, Corpus, CorpusFormat};
use revcue::error::{Error, Result};
use revcue::fetch::{fetch_remote, FetchConfig};
use revcue::lint::{LintConfig, Linter};
use revcue::pipeline::{self, RunConfig};
use revcue::preprocess::{PreprocessConfig, Preprocessor};
use revcue::CueLexicon;

/// Exit status when `lint --strict` finds no rationale.
const EXIT_NO_RATIONALE: u8 = 5;

/// Coherence cue analysis for code review comments.
#[derive(Parser)]
#[command(name = "revcue", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Validate a corpus export and print its manifest as JSON.
    Ingest {
        #[command(flatten)]
        corpus: CorpusArgs,
    },
    /// Print the token stream of every comment as JSONL.
    Preprocess {
        #[command(flatten)]
        corpus: CorpusArgs,
        /// Preprocessing config (TOML).
        #[arg(long)]
        config: Option<PathBuf>,
        /// Write to this file instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Count code collocations per project and write the tables.
    Collocate {
        #[command(flatten)]
        corpus: CorpusArgs,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Run the full study: tables, rankings, inclusion rates, figure data, manifest.
    Report {
        #[command(flatten)]
        corpus: CorpusArgs,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Rank of a word among a project's code collocations.
    RankOf {
        word: String,
        /// collocations.json written by `collocate` or `report`.
        #[arg(long, conflicts_with = "corpus")]
        table: Option<PathBuf>,
        /// Corpus to count from instead of a table.
        #[arg(long, requires = "project")]
        corpus: Option<PathBuf>,
        #[arg(long)]
        project: Option<String>,
        #[arg(long)]
        format: Option<CorpusFormat>,
        /// Words with fewer pairs are not ranked [default: 10]
        #[arg(long)]
        min_frequency: Option<u64>,
        /// Run config (TOML) for corpus mode.
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Check one comment for rationale-bearing language.
    Lint {
        /// Comment file; reads stdin when absent or `-`.
        file: Option<PathBuf>,
        #[arg(long, default_value = "stdin")]
        id: String,
        /// Lexicon file [default: bundled]
        #[arg(long)]
        lexicon: Option<PathBuf>,
        /// Linter config (TOML).
        #[arg(long)]
        config: Option<PathBuf>,
        /// Exit with status 5 when the comment carries no rationale.
        #[arg(long)]
        strict: bool,
    },
    /// Download review messages from a Gerrit server as corpus JSONL.
    Fetch {
        /// Server base URL, e.g. https://review.opendev.org
        #[arg(long)]
        base: String,
        #[arg(long, default_value = "status:merged")]
        query: String,
        #[arg(long, default_value_t = 100)]
        page_size: usize,
        #[arg(long)]
        max_changes: Option<usize>,
        /// Pages requested in parallel.
        #[arg(long, default_value_t = 4)]
        concurrency: usize,
        /// Write to this file instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct CorpusArgs {
    /// Corpus export (JSONL or CSV).
    corpus: PathBuf,
    /// Input format [default: from extension, JSONL unless .csv]
    #[arg(long)]
    format: Option<CorpusFormat>,
}

#[derive(Args)]
struct RunArgs {
    /// Run config (TOML); flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Lexicon file [default: bundled]
    #[arg(long)]
    lexicon: Option<PathBuf>,
    /// Max distance between code and partner word [default: 2]
    #[arg(long)]
    window: Option<usize>,
    /// Frequency filter for rankings [default: 10]
    #[arg(long)]
    min_frequency: Option<u64>,
    /// Top-k cutoffs [default: 50,100,150,200]
    #[arg(long, value_delimiter = ',')]
    top_k: Option<Vec<usize>>,
    /// Partner words never counted [default: a,an]
    #[arg(long, value_delimiter = ',')]
    exclude: Option<Vec<String>>,
    /// Count a partner once per comment [default: off]
    #[arg(long)]
    dedup_per_comment: bool,
    /// Stop windows at sentence ends [default: off]
    #[arg(long)]
    sentence_boundaries: bool,
    /// Worker threads [default: all cores]
    #[arg(long)]
    threads: Option<usize>,
    /// Output directory [default: revcue-out]
    #[arg(long)]
    out: Option<PathBuf>,
}

impl RunArgs {
    fn resolve(&self) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        if let Some(l) = &self.lexicon {
            cfg.lexicon = Some(l.clone());
        }
        let s = &mut cfg.settings;
        if let Some(w) = self.window {
            s.window.distance = w;
        }
        if let Some(m) = self.min_frequency {
            s.min_frequency = m;
        }
        if let Some(ks) = &self.top_k {
            s.top_ks = ks.clone();
        }
        if let Some(ex) = &self.exclude {
            s.window.exclusions = ex.iter().map(|e| e.trim().to_lowercase()).collect();
        }
        s.window.dedup_per_comment |= self.dedup_per_comment;
        s.preprocess.sentence_boundaries |= self.sentence_boundaries;
        if self.threads.is_some() {
            cfg.threads = self.threads;
        }
        if let Some(out) = &self.out {
            cfg.output_dir = out.clone();
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn load_corpus(args: &CorpusArgs) -> Result<Corpus> {
    let corpus = read_corpus(&args.corpus, args.format)?;
    report_warnings(&corpus);
    Ok(corpus)
}

fn report_warnings(corpus: &Corpus) {
    for w in &corpus.warnings {
        eprintln!("{}: {w}", corpus_source(corpus));
    }
}

fn corpus_source(corpus: &Corpus) -> &str {
    corpus
        .manifest
        .projects
        .first()
        .map_or("corpus", |p| p.source.as_str())
}

fn load_toml<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(io::BufWriter::new(std::fs::File::create(p).map_err(
            |e| Error::Io {
                path: p.to_path_buf(),
                source: e,
            },
        )?)),
        None => Box::new(io::BufWriter::new(io::stdout().lock())),
    })
}

fn stdout_err(e: io::Error) -> Error {
    Error::Io {
        path: PathBuf::from("<stdout>"),
        source: e,
    }
}

fn print_json<T: serde::Serialize>(value: &T) -> Result<()> {
    let mut out = io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, value)
        .map_err(|e| Error::Invalid(format!("serializing JSON: {e}")))?;
    writeln!(out).map_err(stdout_err)
}

fn run(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Ingest { corpus } => {
            let corpus = load_corpus(&corpus)?;
            eprintln!(
                "{} records, {} comments, {} skipped",
                corpus.records,
                corpus.comments.len(),
                corpus.warnings.len()
            );
            print_json(&corpus.manifest)?;
        }
        Command::Preprocess { corpus, config, out } => {
            let cfg: PreprocessConfig = match config {
                Some(p) => load_toml(&p)?,
                None => PreprocessConfig::default(),
            };
            let corpus = load_corpus(&corpus)?;
            let streams = pipeline::preprocess_corpus(&Preprocessor::new(cfg), &corpus.comments);
            let target = out.as_deref();
            let mut w = output(target)?;
            let io_err = |e: io::Error| Error::Io {
                path: target.map_or_else(|| PathBuf::from("<stdout>"), Path::to_path_buf),
                source: e,
            };
            for s in &streams {
                serde_json::to_writer(&mut w, s).map_err(|e| io_err(e.into()))?;
                w.write_all(b"\n").map_err(io_err)?;
            }
            w.flush().map_err(io_err)?;
        }
        Command::Collocate { corpus, run } => {
            let cfg = run.resolve()?;
            let corpus = load_corpus(&corpus)?;
            let tables = pipeline::with_threads(cfg.threads, || {
                pipeline::collocate_corpus(&cfg.settings, &corpus.comments)
            })??;
            let dirs = pipeline::project_dirs(tables.iter().map(|(t, _)| t.project.as_str()));
            for ((table, _), dir) in tables.iter().zip(dirs) {
                let dir = cfg.output_dir.join(dir);
                std::fs::create_dir_all(&dir).map_err(|e| Error::Io {
                    path: dir.clone(),
                    source: e,
                })?;
                pipeline::write_table(&dir, table, cfg.settings.min_frequency)?;
                eprintln!(
                    "{}: {} words, {} pairs -> {}",
                    table.project,
                    table.counts.len(),
                    table.total_pairs,
                    dir.display()
                );
            }
        }
        Command::Report { corpus, run } => {
            let cfg = run.resolve()?;
            let lexicon = cfg.load_lexicon()?;
            let corpus = load_corpus(&corpus)?;
            let manifest = pipeline::run_pipeline(&cfg, &corpus, &lexicon)?;
            for w in &manifest.warnings {
                eprintln!("warning: {w}");
            }
            for p in &manifest.projects {
                let series: Vec<String> = p
                    .inclusion
                    .iter()
                    .map(|s| format!("top{}={:.2}", s.k, s.rate))
                    .collect();
                println!(
                    "{}: {} comments, {} qualifying words, {}",
                    p.name,
                    p.comments,
                    p.qualifying_words,
                    series.join(" ")
                );
            }
            if let Some(i) = &manifest.intersection {
                let words: Vec<&str> = i.words.iter().map(String::as_str).collect();
                println!("intersection@{}: {}", i.k, words.join(", "));
            }
            println!("manifest: {}", cfg.output_dir.join("manifest.json").display());
        }
        Command::RankOf {
            word,
            table,
            corpus,
            project,
            format,
            min_frequency,
            config,
        } => {
            let mut cfg = match config {
                Some(p) => RunConfig::load(&p)?,
                None => RunConfig::default(),
            };
            if let Some(m) = min_frequency {
                cfg.settings.min_frequency = m;
            }
            let table: CollocationTable = match (table, corpus) {
                (Some(path), _) => {
                    let text = std::fs::read_to_string(&path).map_err(|e| Error::Io {
                        path: path.clone(),
                        source: e,
                    })?;
                    let export: TableExport = serde_json::from_str(&text)
                        .map_err(|e| Error::Invalid(format!("{}: {e}", path.display())))?;
                    export.into()
                }
                (None, Some(path)) => {
                    let project = project.expect("clap enforces --project");
                    let corpus = read_corpus(&path, format)?;
                    report_warnings(&corpus);
                    let wanted: Vec<Comment> = corpus
                        .comments
                        .into_iter()
                        .filter(|c| c.project == project)
                        .collect();
                    pipeline::collocate_corpus(&cfg.settings, &wanted)?
                        .into_iter()
                        .map(|(t, _)| t)
                        .next()
                        .ok_or_else(|| Error::Invalid(format!("no comments for project {project:?}")))?
                }
                (None, None) => {
                    return Err(Error::Invalid("rank-of needs --table or --corpus".into()));
                }
            };
            let ranked = rank(&table, cfg.settings.min_frequency);
            match ranked.rank_of(&word) {
                Some((pos, total)) => println!(
                    "{}: {word} is {pos} of {total} (count {})",
                    table.project,
                    table.count(&word.to_lowercase())
                ),
                None => println!(
                    "{}: {word} not ranked (count {}, min frequency {})",
                    table.project,
                    table.count(&word.to_lowercase()),
                    ranked.min_frequency
                ),
            }
        }
        Command::Lint {
            file,
            id,
            lexicon,
            config,
            strict,
        } => {
            let cfg: LintConfig = match config {
                Some(p) => load_toml(&p)?,
                None => LintConfig::default(),
            };
            let lexicon = match lexicon {
                Some(p) => CueLexicon::load(p)?,
                None => CueLexicon::default_lexicon(),
            };
            let mut bytes = Vec::new();
            match file.as_deref() {
                Some(p) if p != Path::new("-") => {
                    bytes = std::fs::read(p).map_err(|e| Error::Io {
                        path: p.to_path_buf(),
                        source: e,
                    })?;
                }
                _ => {
                    io::stdin().read_to_end(&mut bytes).map_err(|e| Error::Io {
                        path: PathBuf::from("<stdin>"),
                        source: e,
                    })?;
                }
            }
            let message = String::from_utf8_lossy(&bytes);
            if matches!(message, std::borrow::Cow::Owned(_)) {
                eprintln!("warning: {id}: malformed UTF-8 replaced with U+FFFD");
            }
            let linter = Linter::new(lexicon, cfg);
            let report = linter.lint(&Comment::new(id, "-", message.into_owned()));
            for line in report.diagnostics() {
                eprintln!("{line}");
            }
            print_json(&report)?;
            if strict && !report.rationale_flag {
                return Ok(EXIT_NO_RATIONALE);
            }
        }
        Command::Fetch {
            base,
            query,
            page_size,
            max_changes,
            concurrency,
            out,
        } => {
            let mut cfg = FetchConfig::new(base, query);
            cfg.page_size = page_size;
            cfg.max_changes = max_changes;
            cfg.concurrency = concurrency;
            let outcome = fetch_remote(cfg, None)?;
            for e in &outcome.errors {
                eprintln!("warning: {e}");
            }
            if outcome.partial {
                eprintln!("warning: results are partial");
            }
            eprintln!(
                "{} changes, {} messages",
                outcome.changes,
                outcome.comments.len()
            );
            let target = out.as_deref();
            let mut w = output(target)?;
            let io_err = |e: io::Error| Error::Io {
                path: target.map_or_else(|| PathBuf::from("<stdout>"), Path::to_path_buf),
                source: e,
            };
            write_jsonl(&outcome.comments, &mut w).map_err(io_err)?;
            w.flush().map_err(io_err)?;
        }
    }
    Ok(0)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
