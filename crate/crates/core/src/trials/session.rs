use super::{Clock, Presentation, TrialPlan, TrialsError};
use crate::doc::{self, DocError};
use crate::jsonl::{write_responses, JsonlError};
use crate::mlds::TrialResponse;
use crate::observers::{ObserverError, ObserverKind, PresentedTrial};
use crate::stimuli::InstanceSequence;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashMap};
use std::path::{Path, PathBuf};
use std::sync::Arc;
use thiserror::Error;

/// Resolves sequence ids to loaded sequences.
pub trait SequenceSource {
    fn sequence(&self, id: &str) -> Result<Arc<InstanceSequence>, TrialsError>;
}

impl SequenceSource for BTreeMap<String, Arc<InstanceSequence>> {
    fn sequence(&self, id: &str) -> Result<Arc<InstanceSequence>, TrialsError> {
        self.get(id)
            .cloned()
            .ok_or_else(|| TrialsError::MissingSequence(id.to_string()))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SessionRecord {
    pub observer_id: String,
    pub plan: TrialPlan,
    pub responses: Vec<TrialResponse>,
    pub started_ms: u64,
    pub finished_ms: u64,
    pub complete: bool,
}

/// Sidecar metadata written next to a session's response file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SessionSummary {
    pub observer_id: String,
    pub plan: TrialPlan,
    pub n_responses: usize,
    pub started_ms: u64,
    pub finished_ms: u64,
    pub complete: bool,
}

impl SessionRecord {
    pub fn summary(&self) -> SessionSummary {
        SessionSummary {
            observer_id: self.observer_id.clone(),
            plan: self.plan.clone(),
            n_responses: self.responses.len(),
            started_ms: self.started_ms,
            finished_ms: self.finished_ms,
            complete: self.complete,
        }
    }
}

#[derive(Debug, Error)]
pub enum SessionError {
    #[error(transparent)]
    Plan(#[from] TrialsError),
    #[error(transparent)]
    Observer(#[from] ObserverError),
    #[error("session aborted after {} responses: {source}", partial.responses.len())]
    Aborted {
        partial: Box<SessionRecord>,
        #[source]
        source: Box<dyn std::error::Error + Send + Sync>,
    },
    #[error(transparent)]
    Write(#[from] JsonlError),
    #[error(transparent)]
    Doc(#[from] DocError),
}

/// Runs every scheduled trial through the observer. Flips are applied
/// before the observer sees a trial and undone before the response is
/// recorded. A failure mid-session returns the responses gathered so far
/// in [`SessionError::Aborted`], flagged incomplete.
pub fn run_machine_session(
    plan: &TrialPlan,
    observer: &ObserverKind,
    sequences: &dyn SequenceSource,
    clock: &dyn Clock,
) -> Result<SessionRecord, SessionError> {
    let schedule = plan.schedule()?;
    let mut obs = observer.build()?;
    let mut record = SessionRecord {
        observer_id: obs.observer_id().to_string(),
        plan: plan.clone(),
        responses: Vec::with_capacity(schedule.len()),
        started_ms: clock.now_ms(),
        finished_ms: 0,
        complete: false,
    };
    let mut loaded: HashMap<String, Arc<InstanceSequence>> = HashMap::new();
    for trial in &schedule {
        let step = (|| -> Result<TrialResponse, Box<dyn std::error::Error + Send + Sync>> {
            let seq = match loaded.get(&trial.sequence_id) {
                Some(s) => s.clone(),
                None => {
                    let s = sequences.sequence(&trial.sequence_id)?;
                    loaded.insert(trial.sequence_id.clone(), s.clone());
                    s
                }
            };
            let presentation = Presentation::from_seed(trial.presentation_seed);
            let (first, second) = presentation.present(trial.quadruple);
            let shown = obs.choose(&PresentedTrial {
                sequence: &seq,
                first,
                second,
            })?;
            Ok(TrialResponse {
                sequence_id: trial.sequence_id.clone(),
                class_pair: seq.spec.class_pair.clone(),
                quadruple: trial.quadruple,
                choice: presentation.to_canonical(shown),
                observer_id: record.observer_id.clone(),
                presentation_seed: trial.presentation_seed,
                timestamp: clock.now_ms(),
            })
        })();
        match step {
            Ok(r) => record.responses.push(r),
            Err(source) => {
                record.finished_ms = clock.now_ms();
                return Err(SessionError::Aborted {
                    partial: Box::new(record),
                    source,
                });
            }
        }
    }
    record.finished_ms = clock.now_ms();
    record.complete = true;
    Ok(record)
}

/// Path of the sidecar summary for a response file.
pub fn sidecar_path(responses: &Path) -> PathBuf {
    let mut name = responses.file_name().unwrap_or_default().to_os_string();
    name.push(".session.json");
    responses.with_file_name(name)
}

/// Writes the responses as JSONL at `path` and the summary sidecar next to
/// it.
pub fn save_session(record: &SessionRecord, path: &Path) -> Result<PathBuf, SessionError> {
    write_responses(path, &record.responses)?;
    let side = sidecar_path(path);
    doc::write(&side, "session", &record.summary())?;
    Ok(side)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mlds::{Choice, ClassPair, PerceptualScale};
    use crate::observers::Manifest;
    use crate::stimuli::{GrayImage, SequenceSpec, Viewport};
    use crate::trials::{build_plan, LogicalClock};

    fn source(n: usize) -> BTreeMap<String, Arc<InstanceSequence>> {
        (0..n)
            .map(|i| {
                let spec = SequenceSpec::new(
                    ClassPair::new("cat", "dog"),
                    format!("c{i}"),
                    format!("d{i}"),
                    Viewport::XPos,
                );
                let frames = (0..7)
                    .map(|t| GrayImage::filled(4, 4, t as f64 / 6.0).unwrap())
                    .collect();
                let seq = InstanceSequence { spec, frames };
                (seq.sequence_id(), Arc::new(seq))
            })
            .collect()
    }

    #[test]
    fn random_session_is_balanced_and_reproducible() {
        let src = source(1);
        let plan = build_plan(src.keys().cloned().collect(), 2, 9).unwrap();
        let obs = ObserverKind::Random { seed: 3 };
        let a = run_machine_session(&plan, &obs, &src, &LogicalClock::default()).unwrap();
        assert_eq!(a.responses.len(), 70);
        assert!(a.complete);
        let firsts = a
            .responses
            .iter()
            .filter(|r| r.choice == Choice::FirstPairMoreSimilar)
            .count() as f64;
        assert!((firsts / 70.0 - 0.5).abs() <= 0.18);

        let b = run_machine_session(&plan, &obs, &src, &LogicalClock::default()).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let (pa, pb) = (dir.path().join("a.jsonl"), dir.path().join("b.jsonl"));
        save_session(&a, &pa).unwrap();
        save_session(&b, &pb).unwrap();
        assert_eq!(std::fs::read(&pa).unwrap(), std::fs::read(&pb).unwrap());
        assert!(sidecar_path(&pa).exists());
    }

    #[test]
    fn noiseless_synthetic_reproduces_nominal_comparisons() {
        let src = source(2);
        let plan = build_plan(src.keys().cloned().collect(), 1, 1).unwrap();
        let obs = ObserverKind::Synthetic {
            scale: PerceptualScale::linear(0.1).unwrap(),
            sigma: 0.0,
            seed: 0,
        };
        let rec = run_machine_session(&plan, &obs, &src, &LogicalClock::default()).unwrap();
        assert_eq!(rec.responses.len(), 70);
        for r in &rec.responses {
            let [i, j, k, l] = r.quadruple.indices();
            // Nominal gaps are exact integers here; equal gaps are ties.
            let expected = match (j - i).cmp(&(l - k)) {
                std::cmp::Ordering::Less => Choice::FirstPairMoreSimilar,
                std::cmp::Ordering::Greater => Choice::SecondPairMoreSimilar,
                std::cmp::Ordering::Equal => continue,
            };
            assert_eq!(r.choice, expected, "{}", r.quadruple);
        }
    }

    #[test]
    fn missing_embedding_aborts_with_partial_record() {
        let src = source(1);
        let plan = build_plan(src.keys().cloned().collect(), 1, 1).unwrap();
        let obs = ObserverKind::EmbeddingL2 {
            name: "empty".into(),
            manifest: Arc::new(Manifest::default()),
        };
        match run_machine_session(&plan, &obs, &src, &LogicalClock::default()) {
            Err(SessionError::Aborted { partial, source }) => {
                assert!(!partial.complete);
                assert!(partial.responses.is_empty());
                assert!(source.to_string().contains("frame_"));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn unknown_sequence_aborts() {
        let src = source(1);
        let plan = build_plan(vec!["nope".into()], 1, 1).unwrap();
        let obs = ObserverKind::Random { seed: 0 };
        assert!(matches!(
            run_machine_session(&plan, &obs, &src, &LogicalClock::default()),
            Err(SessionError::Aborted { .. })
        ));
    }

    #[test]
    fn record_invariants_hold() {
        let src = source(3);
        let plan = build_plan(src.keys().cloned().collect(), 1, 5).unwrap();
        let rec = run_machine_session(&plan, &ObserverKind::Random { seed: 1 }, &src, &LogicalClock::default())
            .unwrap();
        assert!(rec.responses.len() <= plan.len());
        assert!(rec.responses.iter().all(|r| plan.quadruples.contains(&r.quadruple)));
        assert!(rec.responses.iter().all(|r| r.observer_id == "random:1"));
        assert!(rec.started_ms < rec.finished_ms);
    }
}
