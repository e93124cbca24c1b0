use super::{spearman_rho, MetricsError, ScoreReport};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::path::Path;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub observer_id: String,
    pub psychophysical_score: f64,
    pub brain_score: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub rows: Vec<ComparisonRow>,
    pub n_matched: usize,
    /// Spearman's rho between the two score columns over matched rows;
    /// absent with fewer than three matches or when a column is constant.
    pub cross_rho: Option<f64>,
}

#[derive(Deserialize)]
struct CsvRow {
    observer_id: String,
    brain_score: f64,
}

/// Parses `observer_id,brain_score` CSV with a header row. An empty input
/// yields an empty map.
pub fn parse_brain_scores(reader: impl Read) -> Result<BTreeMap<String, f64>, MetricsError> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let mut out = BTreeMap::new();
    for (idx, rec) in rdr.deserialize::<CsvRow>().enumerate() {
        let line = idx + 2;
        let row = rec.map_err(|e| MetricsError::ParseError {
            line: e.position().map(|p| p.line() as usize).unwrap_or(line),
            message: e.to_string(),
        })?;
        if !row.brain_score.is_finite() {
            return Err(MetricsError::ParseError {
                line,
                message: format!("non-finite brain_score for {}", row.observer_id),
            });
        }
        if out.insert(row.observer_id.clone(), row.brain_score).is_some() {
            return Err(MetricsError::ParseError {
                line,
                message: format!("duplicate observer_id {}", row.observer_id),
            });
        }
    }
    Ok(out)
}

pub fn read_brain_scores(path: &Path) -> Result<BTreeMap<String, f64>, MetricsError> {
    let file = std::fs::File::open(path).map_err(|source| MetricsError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_brain_scores(file)
}

/// Joins scores with published Brain-Scores. Every score keeps its row;
/// observers without a Brain-Score get an empty cell.
pub fn brainscore_comparison(
    scores: &[ScoreReport],
    brain_scores: &BTreeMap<String, f64>,
) -> ComparisonReport {
    let rows: Vec<ComparisonRow> = scores
        .iter()
        .map(|s| ComparisonRow {
            observer_id: s.observer_id.clone(),
            psychophysical_score: s.psychophysical_score,
            brain_score: brain_scores.get(&s.observer_id).copied().or(s.brain_score),
        })
        .collect();
    let (ps, bs): (Vec<f64>, Vec<f64>) = rows
        .iter()
        .filter_map(|r| r.brain_score.map(|b| (r.psychophysical_score, b)))
        .unzip();
    let cross_rho = if ps.len() >= 3 { spearman_rho(&ps, &bs).ok() } else { None };
    ComparisonReport {
        n_matched: ps.len(),
        rows,
        cross_rho,
    }
}

/// Tab-separated plot data: `observer_id`, `psychophysical_score`,
/// `brain_score` (empty when unknown).
pub fn write_plot_data(report: &ComparisonReport, out: &mut impl Write) -> std::io::Result<()> {
    writeln!(out, "observer_id\tpsychophysical_score\tbrain_score")?;
    for r in &report.rows {
        let bs = r.brain_score.map(|b| b.to_string()).unwrap_or_default();
        writeln!(out, "{}\t{}\t{}", r.observer_id, r.psychophysical_score, bs)?;
    }
    Ok(())
}
