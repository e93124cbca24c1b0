use crate::{ServiceConfig, ServiceError};
use psyscale::doc;
use psyscale::jsonl;
use psyscale::mlds::{Choice, ClassPair, TrialResponse, SEQUENCE_LEN};
use psyscale::pipeline::{stable_hash, SequenceDir, SEQUENCE_FILE};
use psyscale::stimuli::SequenceSpec;
use psyscale::trials::{
    enumerate_quadruples, Clock, Presentation, ScheduledTrial, SystemClock, TrialPlan,
};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::collections::HashMap;
use std::path::PathBuf;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct Session {
    pub token: String,
    pub index: u64,
    pub cursor: usize,
    pub limit: usize,
    pub created_ms: u64,
    pub participant_hint: Option<String>,
}

impl Session {
    pub fn complete(&self) -> bool {
        self.cursor >= self.limit
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct TrialPayload {
    pub trial_id: usize,
    /// Image URLs as two displayed pairs.
    pub pairs: [[String; 2]; 2],
    pub presentation_seed: u32,
    pub total: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct Ack {
    pub trial_id: usize,
    pub line_hash: String,
    pub cursor: usize,
    pub complete: bool,
}

#[derive(Debug, PartialEq)]
pub enum Rejection {
    NotFound,
    Gone,
    Conflict { expected: usize },
    Unavailable(String),
    Internal(String),
}

struct SequenceInfo {
    id: String,
    class_pair: ClassPair,
    /// Content hash of each frame PNG.
    frames: [String; SEQUENCE_LEN],
}

pub struct AppState {
    config: ServiceConfig,
    sequences: Vec<SequenceInfo>,
    stimuli: HashMap<String, PathBuf>,
    base_plan: Option<TrialPlan>,
    epochs: Mutex<HashMap<u64, Arc<Vec<ScheduledTrial>>>>,
    next_index: AtomicU64,
    sessions: Mutex<HashMap<String, Arc<tokio::sync::Mutex<Session>>>>,
    clock: Box<dyn Clock + Send + Sync>,
}

pub fn line_hash(line: &str) -> String {
    hex::encode(Sha256::digest(line.as_bytes()))
}

fn token_for(seed: u64, index: u64) -> String {
    let h = stable_hash(&format!("{seed}/{index}")) as u32;
    format!("{index:06}-{h:08x}")
}

impl AppState {
    pub fn new(config: ServiceConfig) -> Result<Self, ServiceError> {
        Self::with_clock(config, Box::new(SystemClock))
    }

    pub fn with_clock(
        config: ServiceConfig,
        clock: Box<dyn Clock + Send + Sync>,
    ) -> Result<Self, ServiceError> {
        config.validate()?;
        let dir = SequenceDir::open(&config.stimuli_dir).map_err(|e| ServiceError::Stimuli(e.to_string()))?;
        let mut sequences = Vec::new();
        let mut stimuli = HashMap::new();
        for id in dir.ids() {
            let spec: SequenceSpec = doc::read(&dir.root().join(id).join(SEQUENCE_FILE), "sequence")
                .map_err(|e| ServiceError::Stimuli(e.to_string()))?;
            let mut frames: [String; SEQUENCE_LEN] = Default::default();
            for (t, slot) in frames.iter_mut().enumerate() {
                let path = dir.frame_path(id, t);
                let bytes = std::fs::read(&path)
                    .map_err(|e| ServiceError::Stimuli(format!("{}: {e}", path.display())))?;
                let hash = hex::encode(&Sha256::digest(&bytes)[..16]);
                stimuli.insert(hash.clone(), path);
                *slot = hash;
            }
            sequences.push(SequenceInfo {
                id: id.clone(),
                class_pair: spec.class_pair,
                frames,
            });
        }
        let base_plan = (!sequences.is_empty()).then(|| TrialPlan {
            sequence_ids: sequences.iter().map(|s| s.id.clone()).collect(),
            quadruples: enumerate_quadruples(SEQUENCE_LEN).expect("seven positions"),
            repetitions: 1,
            rng_seed: config.rng_seed,
            shuffle: true,
        });
        let next = first_free_index(&config)?;
        Ok(Self {
            config,
            sequences,
            stimuli,
            base_plan,
            epochs: Mutex::new(HashMap::new()),
            next_index: AtomicU64::new(next),
            sessions: Mutex::new(HashMap::new()),
            clock,
        })
    }

    pub fn n_sequences(&self) -> usize {
        self.sequences.len()
    }

    pub fn config(&self) -> &ServiceConfig {
        &self.config
    }

    pub fn stimulus_path(&self, hash: &str) -> Option<&PathBuf> {
        self.stimuli.get(hash)
    }

    pub fn session_file(&self, token: &str) -> PathBuf {
        self.config.output_dir.join(format!("session-{token}.jsonl"))
    }

    /// Trial at global stream position `g`. Each epoch is the full plan
    /// reshuffled under a seed derived from the service seed and the epoch.
    fn stream_trial(&self, g: u64) -> ScheduledTrial {
        let plan = self.base_plan.as_ref().expect("sessions exist only with stimuli");
        let len = plan.len() as u64;
        let epoch = g / len;
        let schedule = {
            let mut epochs = self.epochs.lock().expect("epoch cache poisoned");
            epochs
                .entry(epoch)
                .or_insert_with(|| {
                    let mut p = plan.clone();
                    if epoch > 0 {
                        p.rng_seed = self.config.rng_seed ^ stable_hash(&format!("epoch/{epoch}"));
                    }
                    Arc::new(p.schedule().expect("validated plan"))
                })
                .clone()
        };
        schedule[(g % len) as usize].clone()
    }

    /// Trial `cursor` of session `index`; a pure function of the service
    /// seed and the session index.
    pub fn session_trial(&self, index: u64, cursor: usize) -> ScheduledTrial {
        let g = index * self.config.max_trials_per_session as u64 + cursor as u64;
        self.stream_trial(g)
    }

    pub fn start_session(&self, participant_hint: Option<String>) -> Result<Session, Rejection> {
        if self.base_plan.is_none() {
            return Err(Rejection::Unavailable("no stimulus sequences are loaded".into()));
        }
        let index = self.next_index.fetch_add(1, Ordering::SeqCst);
        let session = Session {
            token: token_for(self.config.rng_seed, index),
            index,
            cursor: 0,
            limit: self.config.max_trials_per_session,
            created_ms: self.clock.now_ms(),
            participant_hint,
        };
        self.sessions
            .lock()
            .expect("session table poisoned")
            .insert(session.token.clone(), Arc::new(tokio::sync::Mutex::new(session.clone())));
        tracing::info!(token = %session.token, "session started");
        Ok(session)
    }

    pub fn session(&self, token: &str) -> Option<Arc<tokio::sync::Mutex<Session>>> {
        self.sessions.lock().expect("session table poisoned").get(token).cloned()
    }

    fn info(&self, sequence_id: &str) -> &SequenceInfo {
        self.sequences
            .iter()
            .find(|s| s.id == sequence_id)
            .expect("plans only reference loaded sequences")
    }

    pub async fn next_trial(&self, token: &str) -> Result<TrialPayload, Rejection> {
        let session = self.session(token).ok_or(Rejection::NotFound)?;
        let s = session.lock().await;
        if s.complete() {
            return Err(Rejection::Gone);
        }
        let trial = self.session_trial(s.index, s.cursor);
        let info = self.info(&trial.sequence_id);
        let (top, bottom) = Presentation::from_seed(trial.presentation_seed).present(trial.quadruple);
        let url = |t: usize| format!("/stimuli/{}.png", info.frames[t]);
        Ok(TrialPayload {
            trial_id: s.cursor,
            pairs: [[url(top.0), url(top.1)], [url(bottom.0), url(bottom.1)]],
            presentation_seed: trial.presentation_seed,
            total: s.limit,
        })
    }

    /// Records a choice made about the displayed pairs.
    pub async fn post_response(
        &self,
        token: &str,
        trial_id: usize,
        presented: Choice,
    ) -> Result<Ack, Rejection> {
        let session = self.session(token).ok_or(Rejection::NotFound)?;
        let mut s = session.lock().await;
        if s.complete() {
            return Err(Rejection::Gone);
        }
        if trial_id != s.cursor {
            return Err(Rejection::Conflict { expected: s.cursor });
        }
        let trial = self.session_trial(s.index, s.cursor);
        let info = self.info(&trial.sequence_id);
        let response = TrialResponse {
            sequence_id: trial.sequence_id.clone(),
            class_pair: info.class_pair.clone(),
            quadruple: trial.quadruple,
            choice: Presentation::from_seed(trial.presentation_seed).to_canonical(presented),
            observer_id: format!("human:{}", s.token),
            presentation_seed: trial.presentation_seed,
            timestamp: self.clock.now_ms(),
        };
        let path = self.session_file(&s.token);
        let line = tokio::task::spawn_blocking(move || jsonl::append_response(&path, &response))
            .await
            .map_err(|e| Rejection::Internal(e.to_string()))?
            .map_err(|e| Rejection::Internal(e.to_string()))?;
        s.cursor += 1;
        Ok(Ack {
            trial_id,
            line_hash: line_hash(&line),
            cursor: s.cursor,
            complete: s.complete(),
        })
    }
}

/// First session index not yet used by a response file in the output
/// directory, so a restarted service never appends to an old session.
fn first_free_index(config: &ServiceConfig) -> Result<u64, ServiceError> {
    let mut next = 0;
    for entry in std::fs::read_dir(&config.output_dir)? {
        let name = entry?.file_name().to_string_lossy().to_string();
        if let Some(idx) = name
            .strip_prefix("session-")
            .and_then(|rest| rest.split('-').next())
            .and_then(|n| n.parse::<u64>().ok())
        {
            next = next.max(idx + 1);
        }
    }
    Ok(next)
}
