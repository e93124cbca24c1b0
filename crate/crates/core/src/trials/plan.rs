use super::TrialsError;
use crate::mlds::{Choice, Quadruple, SEQUENCE_LEN};
use rand::seq::SliceRandom;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// All `i < j < k < l` quadruples over `n` positions in lexicographic order.
pub fn enumerate_quadruples(n: usize) -> Result<Vec<Quadruple>, TrialsError> {
    if !(4..=256).contains(&n) {
        return Err(TrialsError::InvalidParameter(format!(
            "need between 4 and 256 positions, got {n}"
        )));
    }
    let n = n as u16;
    let mut out = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                for l in k + 1..n {
                    out.push(
                        Quadruple::new(i as u8, j as u8, k as u8, l as u8)
                            .expect("lexicographic indices are ordered"),
                    );
                }
            }
        }
    }
    Ok(out)
}

/// Display transformation of one trial, derived from the low three bits of
/// its presentation seed: bit 0 swaps which pair is shown first, bits 1 and
/// 2 reverse the left/right order within the canonical first and second
/// pair.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Presentation {
    pub swap_pairs: bool,
    pub reverse_first: bool,
    pub reverse_second: bool,
}

impl Presentation {
    pub fn from_seed(seed: u32) -> Self {
        Self {
            swap_pairs: seed & 1 != 0,
            reverse_first: seed & 2 != 0,
            reverse_second: seed & 4 != 0,
        }
    }

    /// Frame indices in display order: (top pair, bottom pair).
    pub fn present(&self, q: Quadruple) -> ((usize, usize), (usize, usize)) {
        let orient = |(a, b): (usize, usize), rev: bool| if rev { (b, a) } else { (a, b) };
        let first = orient(q.first(), self.reverse_first);
        let second = orient(q.second(), self.reverse_second);
        if self.swap_pairs {
            (second, first)
        } else {
            (first, second)
        }
    }

    /// Maps a choice about the displayed pairs back to the canonical pairs.
    pub fn to_canonical(&self, presented: Choice) -> Choice {
        if self.swap_pairs {
            presented.flipped()
        } else {
            presented
        }
    }

    /// Inverse of [`Presentation::to_canonical`].
    pub fn to_presented(&self, canonical: Choice) -> Choice {
        self.to_canonical(canonical)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScheduledTrial {
    pub index: usize,
    pub sequence_id: String,
    pub quadruple: Quadruple,
    pub presentation_seed: u32,
}

impl ScheduledTrial {
    pub fn presentation(&self) -> Presentation {
        Presentation::from_seed(self.presentation_seed)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrialPlan {
    pub sequence_ids: Vec<String>,
    pub quadruples: Vec<Quadruple>,
    pub repetitions: u32,
    pub rng_seed: u64,
    pub shuffle: bool,
}

impl TrialPlan {
    pub fn validate(&self) -> Result<(), TrialsError> {
        if self.sequence_ids.is_empty() {
            return Err(TrialsError::InvalidParameter("plan has no sequences".into()));
        }
        if self.quadruples.is_empty() {
            return Err(TrialsError::InvalidParameter("plan has no quadruples".into()));
        }
        if self.repetitions == 0 {
            return Err(TrialsError::InvalidParameter("repetitions must be at least 1".into()));
        }
        if let Some(q) = self.quadruples.iter().find(|q| q.max_index() >= SEQUENCE_LEN) {
            return Err(TrialsError::InvalidParameter(format!(
                "quadruple {q} exceeds the {SEQUENCE_LEN}-frame sequence"
            )));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.sequence_ids.len() * self.quadruples.len() * self.repetitions as usize
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Expands the plan into its trial list. Presentation seeds are drawn in
    /// canonical order (repetition, sequence, quadruple) and the same stream
    /// then drives the shuffle, so the schedule depends only on the plan.
    pub fn schedule(&self) -> Result<Vec<ScheduledTrial>, TrialsError> {
        self.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(self.rng_seed);
        let mut trials = Vec::with_capacity(self.len());
        for _ in 0..self.repetitions {
            for sid in &self.sequence_ids {
                for q in &self.quadruples {
                    trials.push(ScheduledTrial {
                        index: 0,
                        sequence_id: sid.clone(),
                        quadruple: *q,
                        presentation_seed: rng.next_u32(),
                    });
                }
            }
        }
        if self.shuffle {
            trials.shuffle(&mut rng);
        }
        for (idx, t) in trials.iter_mut().enumerate() {
            t.index = idx;
        }
        Ok(trials)
    }
}

/// Plan over all strict quadruples with a shuffled order.
pub fn build_plan(
    sequence_ids: Vec<String>,
    repetitions: u32,
    rng_seed: u64,
) -> Result<TrialPlan, TrialsError> {
    let plan = TrialPlan {
        sequence_ids,
        quadruples: enumerate_quadruples(SEQUENCE_LEN)?,
        repetitions,
        rng_seed,
        shuffle: true,
    };
    plan.validate()?;
    Ok(plan)
}
