use super::{l2_distance, Embedding, GaborBank, GaborBankConfig, Manifest, ObserverError};
use crate::mlds::{Choice, PerceptualScale, Quadruple};
use crate::stimuli::InstanceSequence;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use std::collections::HashMap;
use std::sync::{Arc, Mutex};

/// Source of frame embeddings for machine observers.
pub trait Embedder {
    fn embed(&self, seq: &InstanceSequence, t: usize) -> Result<Arc<Embedding>, ObserverError>;
}

/// Embeds frames on the fly with a Gabor bank. Banks are built per image
/// size and frame embeddings are memoised by frame id.
pub struct GaborEmbedder {
    config: GaborBankConfig,
    banks: Mutex<HashMap<(usize, usize), Arc<GaborBank>>>,
    cache: Mutex<HashMap<String, Arc<Embedding>>>,
}

impl GaborEmbedder {
    pub fn new(config: GaborBankConfig) -> Result<Self, ObserverError> {
        config.validate()?;
        Ok(Self {
            config,
            banks: Mutex::new(HashMap::new()),
            cache: Mutex::new(HashMap::new()),
        })
    }

    fn bank(&self, width: usize, height: usize) -> Result<Arc<GaborBank>, ObserverError> {
        let mut banks = self.banks.lock().expect("gabor bank cache poisoned");
        if let Some(bank) = banks.get(&(width, height)) {
            return Ok(bank.clone());
        }
        let bank = Arc::new(GaborBank::new(self.config.clone(), width, height)?);
        banks.insert((width, height), bank.clone());
        Ok(bank)
    }
}

impl Embedder for GaborEmbedder {
    fn embed(&self, seq: &InstanceSequence, t: usize) -> Result<Arc<Embedding>, ObserverError> {
        let id = seq.frame_id(t);
        if let Some(e) = self.cache.lock().expect("embedding cache poisoned").get(&id) {
            return Ok(e.clone());
        }
        let frame = seq
            .frames
            .get(t)
            .ok_or_else(|| ObserverError::MissingEmbedding(id.clone()))?;
        let bank = self.bank(frame.width(), frame.height())?;
        let e = Arc::new(bank.embed(&id, frame)?);
        self.cache
            .lock()
            .expect("embedding cache poisoned")
            .insert(id, e.clone());
        Ok(e)
    }
}

/// Looks frames up by id (`<sequence_id>/frame_<t>`) in a precomputed
/// manifest.
pub struct ManifestEmbedder {
    manifest: Arc<Manifest>,
}

impl ManifestEmbedder {
    pub fn new(manifest: Arc<Manifest>) -> Self {
        Self { manifest }
    }
}

impl Embedder for ManifestEmbedder {
    fn embed(&self, seq: &InstanceSequence, t: usize) -> Result<Arc<Embedding>, ObserverError> {
        let id = seq.frame_id(t);
        self.manifest
            .get(&id)
            .cloned()
            .map(Arc::new)
            .ok_or(ObserverError::MissingEmbedding(id))
    }
}

fn pair_choice(
    seq: &InstanceSequence,
    first: (usize, usize),
    second: (usize, usize),
    embedder: &dyn Embedder,
) -> Result<Choice, ObserverError> {
    let d1 = l2_distance(&*embedder.embed(seq, first.0)?, &*embedder.embed(seq, first.1)?)?;
    let d2 = l2_distance(&*embedder.embed(seq, second.0)?, &*embedder.embed(seq, second.1)?)?;
    Ok(if d1 <= d2 {
        Choice::FirstPairMoreSimilar
    } else {
        Choice::SecondPairMoreSimilar
    })
}

/// Picks the pair with the smaller embedding distance. Exact ties go to the
/// first pair.
pub fn machine_choice(
    seq: &InstanceSequence,
    q: Quadruple,
    embedder: &dyn Embedder,
) -> Result<Choice, ObserverError> {
    pair_choice(seq, q.first(), q.second(), embedder)
}

fn sample_choice(
    scale: &PerceptualScale,
    first: (usize, usize),
    second: (usize, usize),
    sigma: f64,
    rng: &mut impl Rng,
) -> Choice {
    let psi = scale.values();
    let d1 = (psi[first.1] - psi[first.0]).abs();
    let d2 = (psi[second.1] - psi[second.0]).abs();
    let first_wins = if sigma > 0.0 {
        let eps: f64 = rng.sample(StandardNormal);
        (d2 - d1) + sigma * eps > 0.0
    } else {
        d1 <= d2
    };
    if first_wins {
        Choice::FirstPairMoreSimilar
    } else {
        Choice::SecondPairMoreSimilar
    }
}

/// Draws a response from the Gaussian difference model on `true_scale`.
/// With `sigma == 0` the comparison is deterministic and ties go to the
/// first pair.
pub fn synthetic_choice(
    true_scale: &PerceptualScale,
    q: Quadruple,
    sigma: f64,
    rng: &mut impl Rng,
) -> Choice {
    sample_choice(true_scale, q.first(), q.second(), sigma, rng)
}

/// Trial as shown to an observer: frame indices in display order.
#[derive(Clone, Copy, Debug)]
pub struct PresentedTrial<'a> {
    pub sequence: &'a InstanceSequence,
    pub first: (usize, usize),
    pub second: (usize, usize),
}

/// A response source. Choices refer to the pairs as presented.
pub trait Observer {
    fn observer_id(&self) -> &str;
    fn choose(&mut self, trial: &PresentedTrial<'_>) -> Result<Choice, ObserverError>;
}

/// Observer configuration.
#[derive(Clone, Debug)]
pub enum ObserverKind {
    GaborBank(GaborBankConfig),
    EmbeddingL2 { name: String, manifest: Arc<Manifest> },
    Synthetic {
        scale: PerceptualScale,
        sigma: f64,
        seed: u64,
    },
    Random { seed: u64 },
}

impl ObserverKind {
    pub fn observer_id(&self) -> String {
        match self {
            ObserverKind::GaborBank(_) => "gabor".to_string(),
            ObserverKind::EmbeddingL2 { name, .. } => format!("embedding:{name}"),
            ObserverKind::Synthetic { sigma, seed, .. } => format!("synthetic:{sigma}:{seed}"),
            ObserverKind::Random { seed } => format!("random:{seed}"),
        }
    }

    pub fn build(&self) -> Result<Box<dyn Observer + Send>, ObserverError> {
        let id = self.observer_id();
        Ok(match self {
            ObserverKind::GaborBank(config) => Box::new(MachineObserver {
                id,
                embedder: Box::new(GaborEmbedder::new(config.clone())?),
            }),
            ObserverKind::EmbeddingL2 { manifest, .. } => Box::new(MachineObserver {
                id,
                embedder: Box::new(ManifestEmbedder::new(manifest.clone())),
            }),
            ObserverKind::Synthetic { scale, sigma, seed } => {
                if !(sigma.is_finite() && *sigma >= 0.0) {
                    return Err(ObserverError::InvalidParameter(format!(
                        "synthetic sigma must be finite and non-negative, got {sigma}"
                    )));
                }
                Box::new(SyntheticObserver {
                    id,
                    scale: scale.clone(),
                    sigma: *sigma,
                    rng: ChaCha8Rng::seed_from_u64(*seed),
                })
            }
            ObserverKind::Random { seed } => Box::new(RandomObserver {
                id,
                rng: ChaCha8Rng::seed_from_u64(*seed),
            }),
        })
    }
}

struct MachineObserver {
    id: String,
    embedder: Box<dyn Embedder + Send>,
}

impl Observer for MachineObserver {
    fn observer_id(&self) -> &str {
        &self.id
    }

    fn choose(&mut self, trial: &PresentedTrial<'_>) -> Result<Choice, ObserverError> {
        pair_choice(trial.sequence, trial.first, trial.second, self.embedder.as_ref())
    }
}

struct SyntheticObserver {
    id: String,
    scale: PerceptualScale,
    sigma: f64,
    rng: ChaCha8Rng,
}

impl Observer for SyntheticObserver {
    fn observer_id(&self) -> &str {
        &self.id
    }

    fn choose(&mut self, trial: &PresentedTrial<'_>) -> Result<Choice, ObserverError> {
        Ok(sample_choice(&self.scale, trial.first, trial.second, self.sigma, &mut self.rng))
    }
}

pub struct RandomObserver {
    id: String,
    rng: ChaCha8Rng,
}

impl Observer for RandomObserver {
    fn observer_id(&self) -> &str {
        &self.id
    }

    fn choose(&mut self, _trial: &PresentedTrial<'_>) -> Result<Choice, ObserverError> {
        Ok(if self.rng.random_bool(0.5) {
            Choice::FirstPairMoreSimilar
        } else {
            Choice::SecondPairMoreSimilar
        })
    }
}
