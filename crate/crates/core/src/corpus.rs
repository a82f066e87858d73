//! Corpus ingestion from JSONL or CSV exports.
//!
//! JSONL: one object per line with string fields `id`, `project`, `message`;
//! other fields are ignored. CSV: header `id,project,message`, RFC 4180 quoting.
//! Malformed records are skipped and counted; if more than 10% of records are
//! malformed the whole corpus is rejected.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::io::{BufRead, BufReader, Read};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One review message.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Comment {
    pub id: String,
    pub project: String,
    pub message: String,
}

impl Comment {
    pub fn new(id: impl Into<String>, project: impl Into<String>, message: impl Into<String>) -> Self {
        Comment {
            id: id.into(),
            project: project.into(),
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum CorpusFormat {
    Jsonl,
    Csv,
}

impl CorpusFormat {
    /// Guesses from the file extension; anything other than `.csv` is JSONL.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("csv") => CorpusFormat::Csv,
            _ => CorpusFormat::Jsonl,
        }
    }
}

impl fmt::Display for CorpusFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CorpusFormat::Jsonl => "jsonl",
            CorpusFormat::Csv => "csv",
        })
    }
}

/// Why a record was skipped.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RecordWarning {
    /// 1-based line (JSONL) or record number (CSV, header excluded).
    pub record: usize,
    pub reason: String,
}

impl fmt::Display for RecordWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "warning: record {}: {}", self.record, self.reason)
    }
}

pub const MANIFEST_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProjectEntry {
    pub name: String,
    pub source: String,
    pub comment_count: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusManifest {
    pub format_version: u32,
    pub projects: Vec<ProjectEntry>,
}

impl CorpusManifest {
    pub fn from_comments(comments: &[Comment], source: &str) -> Self {
        let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
        for c in comments {
            *counts.entry(c.project.as_str()).or_default() += 1;
        }
        CorpusManifest {
            format_version: MANIFEST_FORMAT_VERSION,
            projects: counts
                .into_iter()
                .map(|(name, comment_count)| ProjectEntry {
                    name: name.to_string(),
                    source: source.to_string(),
                    comment_count,
                })
                .collect(),
        }
    }

    pub fn total(&self) -> usize {
        self.projects.iter().map(|p| p.comment_count).sum()
    }
}

#[derive(Debug, Clone)]
pub struct Corpus {
    pub comments: Vec<Comment>,
    pub warnings: Vec<RecordWarning>,
    pub manifest: CorpusManifest,
    /// Records seen, including skipped ones.
    pub records: usize,
}

impl Corpus {
    pub fn from_comments(comments: Vec<Comment>, source: &str) -> Self {
        let manifest = CorpusManifest::from_comments(&comments, source);
        Corpus {
            records: comments.len(),
            comments,
            warnings: Vec::new(),
            manifest,
        }
    }

    /// Comments grouped by project, projects in name order, comments in file order.
    pub fn by_project(&self) -> BTreeMap<&str, Vec<&Comment>> {
        let mut groups: BTreeMap<&str, Vec<&Comment>> = BTreeMap::new();
        for c in &self.comments {
            groups.entry(c.project.as_str()).or_default().push(c);
        }
        groups
    }
}

#[derive(Deserialize)]
struct RawRecord {
    id: Option<serde_json::Value>,
    project: Option<serde_json::Value>,
    message: Option<serde_json::Value>,
}

fn field(value: Option<serde_json::Value>, name: &str, allow_empty: bool) -> Result<String, String> {
    match value {
        Some(serde_json::Value::String(s)) if allow_empty || !s.trim().is_empty() => Ok(s),
        Some(serde_json::Value::String(_)) => Err(format!("field '{name}' is empty")),
        Some(_) => Err(format!("field '{name}' must be a string")),
        None => Err(format!("missing field '{name}'")),
    }
}

fn decode_line(bytes: &[u8]) -> Result<Comment, String> {
    let text = String::from_utf8_lossy(bytes);
    let raw: RawRecord = serde_json::from_str(&text).map_err(|e| format!("invalid JSON: {e}"))?;
    Ok(Comment {
        id: field(raw.id, "id", false)?,
        project: field(raw.project, "project", false)?,
        message: field(raw.message, "message", true)?,
    })
}

/// Collects records, enforcing id uniqueness and the malformed-record limit.
struct Collector {
    comments: Vec<Comment>,
    warnings: Vec<RecordWarning>,
    seen: HashSet<String>,
    records: usize,
}

impl Collector {
    fn new() -> Self {
        Collector {
            comments: Vec::new(),
            warnings: Vec::new(),
            seen: HashSet::new(),
            records: 0,
        }
    }

    fn push(&mut self, record: usize, outcome: Result<Comment, String>) {
        self.records += 1;
        let outcome = outcome.and_then(|c| {
            if self.seen.insert(c.id.clone()) {
                Ok(c)
            } else {
                Err(format!("duplicate id {:?}", c.id))
            }
        });
        match outcome {
            Ok(c) => self.comments.push(c),
            Err(reason) => self.warnings.push(RecordWarning { record, reason }),
        }
    }

    fn finish(self, source: &str) -> Result<Corpus> {
        let malformed = self.warnings.len();
        if malformed * 10 > self.records {
            return Err(Error::CorpusQuality {
                malformed,
                total: self.records,
            });
        }
        Ok(Corpus {
            manifest: CorpusManifest::from_comments(&self.comments, source),
            comments: self.comments,
            warnings: self.warnings,
            records: self.records,
        })
    }
}

pub fn read_jsonl(reader: impl Read, source: &str) -> Result<Corpus> {
    let mut reader = BufReader::new(reader);
    let mut collector = Collector::new();
    let mut buf = Vec::new();
    let mut line_no = 0;
    loop {
        buf.clear();
        let n = reader
            .read_until(b'\n', &mut buf)
            .map_err(|e| Error::io(source, e))?;
        if n == 0 {
            break;
        }
        line_no += 1;
        let line = buf.trim_ascii();
        if line.is_empty() {
            continue;
        }
        collector.push(line_no, decode_line(line));
    }
    collector.finish(source)
}

pub fn read_csv(reader: impl Read, source: &str) -> Result<Corpus> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(reader);
    let headers = rdr
        .byte_headers()
        .map_err(|e| Error::Invalid(format!("{source}: {e}")))?
        .clone();
    let column = |name: &str| headers.iter().position(|h| h.trim_ascii() == name.as_bytes());
    let (Some(id_col), Some(project_col), Some(message_col)) =
        (column("id"), column("project"), column("message"))
    else {
        return Err(Error::Invalid(format!(
            "{source}: CSV header must contain id,project,message"
        )));
    };

    let mut collector = Collector::new();
    for (idx, record) in rdr.byte_records().enumerate() {
        let outcome = match record {
            Ok(rec) => {
                let get = |col: usize| rec.get(col).map(|b| String::from_utf8_lossy(b).into_owned());
                match (get(id_col), get(project_col), get(message_col)) {
                    (Some(id), Some(project), Some(message))
                        if !id.trim().is_empty() && !project.trim().is_empty() =>
                    {
                        Ok(Comment { id, project, message })
                    }
                    _ => Err("missing or empty id/project/message".to_string()),
                }
            }
            Err(e) if e.is_io_error() => {
                return Err(Error::Invalid(format!("{source}: {e}")));
            }
            Err(e) => Err(e.to_string()),
        };
        collector.push(idx + 1, outcome);
    }
    collector.finish(source)
}

/// Reads a corpus file. Never modifies the file.
pub fn read_corpus(path: impl AsRef<Path>, format: Option<CorpusFormat>) -> Result<Corpus> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let source = path.display().to_string();
    match format.unwrap_or_else(|| CorpusFormat::from_path(path)) {
        CorpusFormat::Jsonl => read_jsonl(file, &source),
        CorpusFormat::Csv => read_csv(file, &source),
    }
}

/// Writes comments as JSONL, one object per line.
pub fn write_jsonl(comments: &[Comment], mut out: impl std::io::Write) -> std::io::Result<()> {
    for c in comments {
        serde_json::to_writer(&mut out, c)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}
