use super::{MetricsError, SkewnessSet};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VarianceKind {
    /// Divide by N.
    #[default]
    Population,
    /// Divide by N - 1.
    Sample,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VarianceRow {
    pub observer_id: String,
    pub variance: f64,
    pub n: usize,
}

/// Population variance of each observer's skewness values, largest first.
pub fn variance_table(sets: &[SkewnessSet]) -> Result<Vec<VarianceRow>, MetricsError> {
    variance_table_with(sets, VarianceKind::Population)
}

pub fn variance_table_with(
    sets: &[SkewnessSet],
    kind: VarianceKind,
) -> Result<Vec<VarianceRow>, MetricsError> {
    let mut rows = Vec::with_capacity(sets.len());
    for s in sets {
        let n = s.len();
        if n < 2 {
            return Err(MetricsError::InsufficientData(format!(
                "observer {} has {n} skewness value(s), need at least 2",
                s.observer_id
            )));
        }
        let mean = s.values().sum::<f64>() / n as f64;
        let ss: f64 = s.values().map(|v| (v - mean) * (v - mean)).sum();
        let denom = match kind {
            VarianceKind::Population => n,
            VarianceKind::Sample => n - 1,
        };
        rows.push(VarianceRow {
            observer_id: s.observer_id.clone(),
            variance: ss / denom as f64,
            n,
        });
    }
    rows.sort_by(|a, b| {
        b.variance
            .total_cmp(&a.variance)
            .then_with(|| a.observer_id.cmp(&b.observer_id))
    });
    Ok(rows)
}
