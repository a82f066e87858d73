//! Windowed bigram collocations anchored on the code placeholder.
//!
//! For every `CODETOK` at index `i`, each token at `j` with
//! `1 <= |i - j| <= distance` forms one pair. Partners that are placeholders
//! or excluded articles are not counted as words but are tallied in
//! `excluded_pairs`. Counts are per pair instance unless per-comment
//! deduplication is switched on.

use std::collections::{BTreeMap, HashMap};
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::preprocess::{is_placeholder, TokenStream, CODE_PLACEHOLDER};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WindowConfig {
    /// Maximum token distance from the anchor; 2 gives a three-word window.
    pub distance: usize,
    pub exclusions: Vec<String>,
    /// Count each partner word at most once per comment.
    pub dedup_per_comment: bool,
}

impl Default for WindowConfig {
    fn default() -> Self {
        WindowConfig {
            distance: 2,
            exclusions: vec!["a".into(), "an".into()],
            dedup_per_comment: false,
        }
    }
}

impl WindowConfig {
    pub fn validate(&self) -> Result<()> {
        if self.distance == 0 {
            return Err(Error::Config("window distance must be at least 1".into()));
        }
        Ok(())
    }

    pub fn is_excluded(&self, word: &str) -> bool {
        self.exclusions.iter().any(|e| e == word)
    }

    pub fn fingerprint(&self) -> String {
        format!(
            "w{}-x[{}]-{}",
            self.distance,
            self.exclusions.join(","),
            if self.dedup_per_comment { "dedup" } else { "perpair" }
        )
    }
}

/// Partners emitted for one stream.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Pairs<'a> {
    pub partners: Vec<&'a str>,
    pub excluded: u64,
}

/// Enumerates code-anchored pairs in one token stream.
pub fn extract_pairs<'a>(stream: &'a TokenStream, config: &WindowConfig) -> Pairs<'a> {
    let tokens = &stream.tokens;
    let sentences = (!stream.sentence_starts.is_empty()).then(|| stream.sentence_ids());
    let mut pairs = Pairs::default();
    let distance = config.distance.max(1);

    for (i, anchor) in tokens.iter().enumerate() {
        if anchor != CODE_PLACEHOLDER {
            continue;
        }
        let lo = i.saturating_sub(distance);
        let hi = (i + distance).min(tokens.len().saturating_sub(1));
        for j in lo..=hi {
            if j == i {
                continue;
            }
            if let Some(ids) = &sentences {
                if ids[i] != ids[j] {
                    continue;
                }
            }
            let partner = tokens[j].as_str();
            if is_placeholder(partner) || config.is_excluded(partner) {
                pairs.excluded += 1;
            } else {
                pairs.partners.push(partner);
            }
        }
    }
    pairs
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CollocationTable {
    pub project: String,
    pub counts: BTreeMap<String, u64>,
    pub total_pairs: u64,
    pub excluded_pairs: u64,
    pub config_fingerprint: String,
}

impl CollocationTable {
    pub fn empty(project: &str, config: &WindowConfig) -> Self {
        CollocationTable {
            project: project.to_string(),
            counts: BTreeMap::new(),
            total_pairs: 0,
            excluded_pairs: 0,
            config_fingerprint: config.fingerprint(),
        }
    }

    pub fn merge(&mut self, other: CollocationTable) -> Result<()> {
        if other.project != self.project {
            return Err(Error::Invalid(format!(
                "cannot merge table of {:?} into {:?}",
                other.project, self.project
            )));
        }
        for (word, n) in other.counts {
            *self.counts.entry(word).or_default() += n;
        }
        self.total_pairs += other.total_pairs;
        self.excluded_pairs += other.excluded_pairs;
        Ok(())
    }

    pub fn count(&self, word: &str) -> u64 {
        self.counts.get(word).copied().unwrap_or(0)
    }

    /// Table rows in rank order, unfiltered.
    pub fn write_csv(&self, out: impl Write) -> Result<()> {
        rank(self, 0).write_csv(out)
    }

    pub fn to_export(&self) -> TableExport {
        let ranked = rank(self, 0);
        TableExport {
            project: self.project.clone(),
            config_fingerprint: self.config_fingerprint.clone(),
            min_frequency: 0,
            total_pairs: self.total_pairs,
            excluded_pairs: self.excluded_pairs,
            counts: ranked.ranked,
        }
    }
}

/// JSON form of a collocation table; rows are in rank order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TableExport {
    pub project: String,
    pub config_fingerprint: String,
    /// Filter applied to the ranked outputs of the same run; rows here are unfiltered.
    #[serde(default)]
    pub min_frequency: u64,
    pub total_pairs: u64,
    pub excluded_pairs: u64,
    pub counts: Vec<RankedWord>,
}

impl From<TableExport> for CollocationTable {
    fn from(e: TableExport) -> Self {
        CollocationTable {
            project: e.project,
            counts: e.counts.into_iter().map(|r| (r.word, r.count)).collect(),
            total_pairs: e.total_pairs,
            excluded_pairs: e.excluded_pairs,
            config_fingerprint: e.config_fingerprint,
        }
    }
}

/// Mergeable partial counts for one project.
#[derive(Debug, Clone, Default)]
pub struct Accumulator {
    counts: HashMap<String, u64>,
    counted: u64,
    excluded: u64,
}

impl Accumulator {
    pub fn add(&mut self, stream: &TokenStream, config: &WindowConfig) {
        let pairs = extract_pairs(stream, config);
        self.excluded += pairs.excluded;
        let mut partners = pairs.partners;
        if config.dedup_per_comment {
            partners.sort_unstable();
            partners.dedup();
        }
        self.counted += partners.len() as u64;
        for word in partners {
            match self.counts.get_mut(word) {
                Some(n) => *n += 1,
                None => {
                    self.counts.insert(word.to_string(), 1);
                }
            }
        }
    }

    pub fn merge(mut self, other: Accumulator) -> Accumulator {
        let (mut big, small) = if self.counts.len() >= other.counts.len() {
            (std::mem::take(&mut self), other)
        } else {
            (other, self)
        };
        for (word, n) in small.counts {
            *big.counts.entry(word).or_default() += n;
        }
        big.counted += small.counted;
        big.excluded += small.excluded;
        big
    }

    pub fn into_table(self, project: &str, config: &WindowConfig) -> CollocationTable {
        CollocationTable {
            project: project.to_string(),
            counts: self.counts.into_iter().collect(),
            total_pairs: self.counted + self.excluded,
            excluded_pairs: self.excluded,
            config_fingerprint: config.fingerprint(),
        }
    }
}

fn check_project<'a, I>(streams: I, project: &str) -> Result<()>
where
    I: IntoIterator<Item = &'a TokenStream>,
{
    match streams.into_iter().find(|s| s.project != project) {
        Some(s) => Err(Error::ProjectMismatch {
            comment_id: s.comment_id.clone(),
            expected: project.to_string(),
            found: s.project.clone(),
        }),
        None => Ok(()),
    }
}

/// Aggregates pair counts over one project's streams, sharding across the
/// current rayon pool. The result does not depend on input order or thread count.
pub fn build_table(
    streams: &[TokenStream],
    project: &str,
    config: &WindowConfig,
) -> Result<CollocationTable> {
    config.validate()?;
    check_project(streams, project)?;
    let acc = streams
        .par_iter()
        .fold(Accumulator::default, |mut acc, s| {
            acc.add(s, config);
            acc
        })
        .reduce(Accumulator::default, Accumulator::merge);
    Ok(acc.into_table(project, config))
}

/// Single-threaded [`build_table`].
pub fn build_table_sequential<'a, I>(
    streams: I,
    project: &str,
    config: &WindowConfig,
) -> Result<CollocationTable>
where
    I: IntoIterator<Item = &'a TokenStream>,
{
    config.validate()?;
    let mut acc = Accumulator::default();
    for s in streams {
        if s.project != project {
            return Err(Error::ProjectMismatch {
                comment_id: s.comment_id.clone(),
                expected: project.to_string(),
                found: s.project.clone(),
            });
        }
        acc.add(s, config);
    }
    Ok(acc.into_table(project, config))
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct RankedWord {
    pub word: String,
    pub count: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankedCollocations {
    pub project: String,
    pub ranked: Vec<RankedWord>,
    pub min_frequency: u64,
}

impl RankedCollocations {
    pub fn len(&self) -> usize {
        self.ranked.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ranked.is_empty()
    }

    pub fn words(&self) -> impl Iterator<Item = &str> {
        self.ranked.iter().map(|r| r.word.as_str())
    }

    /// 1-based rank of `word` and the number of ranked words.
    pub fn rank_of(&self, word: &str) -> Option<(usize, usize)> {
        let word = word.to_lowercase();
        self.ranked
            .iter()
            .position(|r| r.word == word)
            .map(|pos| (pos + 1, self.ranked.len()))
    }

    pub fn write_csv(&self, out: impl Write) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let csv_err = |e: csv::Error| Error::Invalid(format!("writing CSV: {e}"));
        w.write_record(["word", "count"]).map_err(csv_err)?;
        for r in &self.ranked {
            w.write_record([r.word.as_str(), &r.count.to_string()])
                .map_err(csv_err)?;
        }
        w.flush()
            .map_err(|e| Error::Invalid(format!("writing CSV: {e}")))?;
        Ok(())
    }
}

/// Drops words below `min_frequency` and orders by count descending, then word.
pub fn rank(table: &CollocationTable, min_frequency: u64) -> RankedCollocations {
    let mut ranked: Vec<RankedWord> = table
        .counts
        .iter()
        .filter(|(_, &n)| n >= min_frequency)
        .map(|(w, &n)| RankedWord {
            word: w.clone(),
            count: n,
        })
        .collect();
    ranked.sort_by(|a, b| b.count.cmp(&a.count).then_with(|| a.word.cmp(&b.word)));
    RankedCollocations {
        project: table.project.clone(),
        ranked,
        min_frequency,
    }
}

pub fn rank_of(ranked: &RankedCollocations, word: &str) -> Option<(usize, usize)> {
    ranked.rank_of(word)
}
