use crate::metrics::{skewness, SkewnessSet};
use crate::mlds::{
    fit_mlds, ordering_check, six_point_check, ClassPair, FitConfig, FitResult, TrialResponse,
    ORDERING_THRESHOLD, SIX_POINT_THRESHOLD,
};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassFit {
    pub class_pair: ClassPair,
    pub n_sequences: usize,
    /// Sequences dropped by the validity checks.
    pub excluded_sequences: Vec<String>,
    pub fit: FitResult,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitFailure {
    pub class_pair: ClassPair,
    pub error: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub observer_id: String,
    pub entries: Vec<ClassFit>,
    pub failures: Vec<FitFailure>,
}

/// A sequence fails when a check can be evaluated and does not pass.
fn sequence_fails(responses: &[TrialResponse], sequence_id: &str) -> bool {
    let ordering = ordering_check(responses, sequence_id, ORDERING_THRESHOLD);
    let six = six_point_check(responses, sequence_id, SIX_POINT_THRESHOLD);
    matches!(ordering, Ok(ref r) if !r.pass) || matches!(six, Ok(ref r) if !r.pass)
}

/// Fits one scale per class pair from pooled responses, keeping response
/// order within each class pair. With `qualify`, responses of sequences
/// failing the ordering or six-point check are dropped first.
pub fn fit_by_class_pair(
    responses: &[TrialResponse],
    config: &FitConfig,
    observer_id: Option<&str>,
    qualify: bool,
) -> FitReport {
    let mut groups: BTreeMap<&ClassPair, Vec<TrialResponse>> = BTreeMap::new();
    for r in responses {
        groups.entry(&r.class_pair).or_default().push(r.clone());
    }
    let observer_id = observer_id.map(str::to_string).unwrap_or_else(|| {
        let ids: BTreeSet<&str> = responses.iter().map(|r| r.observer_id.as_str()).collect();
        match ids.len() {
            1 => ids.into_iter().next().expect("one id").to_string(),
            _ => "pooled".to_string(),
        }
    });
    let mut report = FitReport {
        observer_id,
        entries: Vec::new(),
        failures: Vec::new(),
    };
    for (cp, group) in groups {
        let sequences: BTreeSet<&str> = group.iter().map(|r| r.sequence_id.as_str()).collect();
        let excluded: Vec<String> = if qualify {
            sequences
                .iter()
                .filter(|s| sequence_fails(&group, s))
                .map(|s| s.to_string())
                .collect()
        } else {
            Vec::new()
        };
        let kept: Vec<TrialResponse> = group
            .iter()
            .filter(|r| !excluded.contains(&r.sequence_id))
            .cloned()
            .collect();
        match fit_mlds(&kept, config) {
            Ok(fit) => report.entries.push(ClassFit {
                class_pair: cp.clone(),
                n_sequences: sequences.len(),
                excluded_sequences: excluded,
                fit,
            }),
            Err(e) => {
                tracing::warn!(class_pair = %cp, error = %e, "fit skipped");
                report.failures.push(FitFailure {
                    class_pair: cp.clone(),
                    error: e.to_string(),
                })
            }
        }
    }
    report
}

pub fn skewness_from_report(report: &FitReport) -> SkewnessSet {
    SkewnessSet {
        observer_id: report.observer_id.clone(),
        entries: report
            .entries
            .iter()
            .map(|e| (e.class_pair.clone(), skewness(&e.fit.scale)))
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mlds::{Choice, Quadruple};
    use crate::trials::enumerate_quadruples;

    /// Noiseless responses to a linear scale, tie quadruples answered
    /// alternately.
    fn responses(cp: &ClassPair, seq: &str, reps: usize, invert: bool) -> Vec<TrialResponse> {
        let mut out = Vec::new();
        for n in 0..reps {
            for q in enumerate_quadruples(7).unwrap() {
                let [i, j, k, l] = q.indices();
                let mut choice = match (j - i).cmp(&(l - k)) {
                    std::cmp::Ordering::Less => Choice::FirstPairMoreSimilar,
                    std::cmp::Ordering::Greater => Choice::SecondPairMoreSimilar,
                    std::cmp::Ordering::Equal if n % 2 == 0 => Choice::FirstPairMoreSimilar,
                    std::cmp::Ordering::Equal => Choice::SecondPairMoreSimilar,
                };
                if invert {
                    choice = choice.flipped();
                }
                out.push(TrialResponse {
                    sequence_id: seq.into(),
                    class_pair: cp.clone(),
                    quadruple: q,
                    choice,
                    observer_id: "gabor".into(),
                    presentation_seed: 0,
                    timestamp: 0,
                });
            }
        }
        out
    }

    #[test]
    fn groups_by_class_pair_and_records_failures() {
        let a = ClassPair::new("a", "b");
        let c = ClassPair::new("c", "d");
        let mut rs = responses(&a, "a__b/x", 4, false);
        rs.push(TrialResponse {
            quadruple: Quadruple::new(0, 1, 2, 3).unwrap(),
            ..responses(&c, "c__d/y", 1, false)[0].clone()
        });
        let report = fit_by_class_pair(&rs, &FitConfig::default(), None, false);
        assert_eq!(report.observer_id, "gabor");
        assert_eq!(report.entries.len(), 1);
        assert_eq!(report.entries[0].class_pair, a);
        assert_eq!(report.failures.len(), 1);
        assert_eq!(report.failures[0].class_pair, c);
        let skew = skewness_from_report(&report);
        assert_eq!(skew.len(), 1);
        assert!(skew.entries[&a].abs() < 0.1);
    }

    #[test]
    fn qualification_drops_inverted_sequences() {
        let cp = ClassPair::new("a", "b");
        let mut rs = responses(&cp, "a__b/good", 2, false);
        rs.extend(responses(&cp, "a__b/bad", 2, true));
        let report = fit_by_class_pair(&rs, &FitConfig::default(), Some("obs"), true);
        assert_eq!(report.observer_id, "obs");
        assert_eq!(report.entries[0].n_sequences, 2);
        assert_eq!(report.entries[0].excluded_sequences, vec!["a__b/bad".to_string()]);
    }
}
