use super::{spearman_rho, MetricsError, SkewnessSet};
use serde::{Deserialize, Serialize};

pub const MIN_SHARED_PAIRS: usize = 3;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScoreReport {
    pub observer_id: String,
    pub psychophysical_score: f64,
    pub n_pairs_compared: usize,
    pub brain_score: Option<f64>,
    pub rho_signed: f64,
}

/// Rank agreement between a model's skewness values and the human ones over
/// the class pairs both sets contain. The score is `|rho|`, since a scale
/// and its mirror image carry the same perceptual ordering.
pub fn psychophysical_score(human: &SkewnessSet, model: &SkewnessSet) -> Result<ScoreReport, MetricsError> {
    let (mut h, mut m) = (Vec::new(), Vec::new());
    for (cp, sb) in &human.entries {
        if let Some(v) = model.entries.get(cp) {
            h.push(*sb);
            m.push(*v);
        }
    }
    if h.len() < MIN_SHARED_PAIRS {
        return Err(MetricsError::InsufficientOverlap {
            found: h.len(),
            needed: MIN_SHARED_PAIRS,
        });
    }
    let rho = spearman_rho(&h, &m)?;
    Ok(ScoreReport {
        observer_id: model.observer_id.clone(),
        psychophysical_score: rho.abs(),
        n_pairs_compared: h.len(),
        brain_score: None,
        rho_signed: rho,
    })
}
