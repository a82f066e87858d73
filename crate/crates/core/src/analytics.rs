//! Inclusion of coherence cue words in the top of a collocation ranking.

use std::collections::BTreeSet;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::collocation::RankedCollocations;
use crate::error::{Error, Result};
use crate::lexicon::CueLexicon;

pub const DEFAULT_TOP_KS: [usize; 4] = [50, 100, 150, 200];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InclusionPoint {
    pub k: usize,
    /// `hits.len() / k`; the denominator stays `k` for short rankings.
    pub rate: f64,
    /// Cue words among the top `k`, in rank order.
    pub hits: Vec<String>,
    /// Set when fewer than `k` words were ranked.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub warning: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InclusionReport {
    pub project: String,
    pub series: Vec<InclusionPoint>,
    pub lexicon_version: String,
}

pub fn inclusion_rate(
    ranked: &RankedCollocations,
    lexicon: &CueLexicon,
    k: usize,
) -> Result<InclusionPoint> {
    if k == 0 {
        return Err(Error::Invalid("k must be at least 1".into()));
    }
    let hits: Vec<String> = ranked
        .words()
        .take(k)
        .filter(|w| lexicon.is_single_word_cue(w))
        .map(str::to_string)
        .collect();
    let warning = (ranked.len() < k).then(|| {
        format!(
            "only {} words ranked for {} (min frequency {}); rate uses k = {k}",
            ranked.len(),
            ranked.project,
            ranked.min_frequency
        )
    });
    Ok(InclusionPoint {
        k,
        rate: hits.len() as f64 / k as f64,
        hits,
        warning,
    })
}

pub fn inclusion_series(
    ranked: &RankedCollocations,
    lexicon: &CueLexicon,
    ks: &[usize],
) -> Result<InclusionReport> {
    if ks.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Invalid(format!("top-k list must be strictly increasing: {ks:?}")));
    }
    let series = ks
        .iter()
        .map(|&k| inclusion_rate(ranked, lexicon, k))
        .collect::<Result<Vec<_>>>()?;
    Ok(InclusionReport {
        project: ranked.project.clone(),
        series,
        lexicon_version: lexicon.version().to_string(),
    })
}

/// Cue words found in the top `k` of every project's ranking.
pub fn cross_project_intersection(
    rankings: &[RankedCollocations],
    lexicon: &CueLexicon,
    k: usize,
) -> Result<BTreeSet<String>> {
    if rankings.len() < 2 {
        return Err(Error::Invalid(
            "intersection needs at least two project rankings".into(),
        ));
    }
    let mut sets = rankings.iter().map(|r| {
        inclusion_rate(r, lexicon, k).map(|p| p.hits.into_iter().collect::<BTreeSet<_>>())
    });
    let mut acc = sets.next().expect("at least two rankings")?;
    for set in sets {
        let set = set?;
        acc.retain(|w| set.contains(w));
    }
    Ok(acc)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FigureRow {
    pub project: String,
    #[serde(rename = "K")]
    pub k: usize,
    pub rate: f64,
}

pub fn figure_rows(reports: &[InclusionReport]) -> Vec<FigureRow> {
    reports
        .iter()
        .flat_map(|r| {
            r.series.iter().map(|p| FigureRow {
                project: r.project.clone(),
                k: p.k,
                rate: p.rate,
            })
        })
        .collect()
}

pub fn write_figure_csv(reports: &[InclusionReport], out: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let err = |e: csv::Error| Error::Invalid(format!("writing figure CSV: {e}"));
    w.write_record(["project", "K", "rate"]).map_err(err)?;
    for row in figure_rows(reports) {
        w.write_record([row.project.as_str(), &row.k.to_string(), &row.rate.to_string()])
            .map_err(err)?;
    }
    w.flush()
        .map_err(|e| Error::Invalid(format!("writing figure CSV: {e}")))?;
    Ok(())
}

/// Writes `out` as CSV (`project,K,rate`) and a JSON bundle next to it
/// (same path with a `.json` extension).
pub fn emit_figure_data(reports: &[InclusionReport], out: &Path) -> Result<()> {
    let mut csv_buf = Vec::new();
    write_figure_csv(reports, &mut csv_buf)?;
    std::fs::write(out, csv_buf).map_err(|e| Error::io(out, e))?;

    let json_path = out.with_extension("json");
    let mut json = serde_json::to_vec_pretty(reports)
        .map_err(|e| Error::Invalid(format!("serializing figure data: {e}")))?;
    json.push(b'\n');
    std::fs::write(&json_path, json).map_err(|e| Error::io(&json_path, e))?;
    Ok(())
}

pub fn read_figure_csv(path: &Path) -> Result<Vec<FigureRow>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    csv::Reader::from_reader(file)
        .deserialize()
        .collect::<std::result::Result<Vec<FigureRow>, _>>()
        .map_err(|e| Error::Invalid(format!("{}: {e}", path.display())))
}
