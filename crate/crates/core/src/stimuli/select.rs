use super::mask::{jaccard, ObjectMask};
use super::StimuliError;
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;

/// Candidates whose Jaccard index lies within this distance of the best
/// candidate are treated as indistinguishable from it.
pub const TIE_EPSILON: f64 = 0.01;

#[derive(Clone, Debug, PartialEq)]
pub struct InstancePair {
    pub a: String,
    pub b: String,
    pub jaccard: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct PairSelection {
    pub pairs: Vec<InstancePair>,
    /// Sources that had fewer candidates than requested; all of their
    /// candidates were kept.
    pub short_instances: Vec<String>,
}

impl PairSelection {
    pub fn has_warning(&self) -> bool {
        !self.short_instances.is_empty()
    }
}

/// Picks up to `per_instance` partners from `candidates` for every source.
///
/// Partners are ranked by Jaccard index. When more than `per_instance`
/// candidates sit within `tie_epsilon` of the best one, the partners are a
/// seeded uniform draw from that top group instead. Sources are visited in
/// id order with a single RNG stream, so the output is a function of the
/// inputs and `rng_seed`.
pub fn select_partners(
    sources: &BTreeMap<String, ObjectMask>,
    candidates: &BTreeMap<String, ObjectMask>,
    per_instance: usize,
    tie_epsilon: f64,
    rng_seed: u64,
) -> Result<PairSelection, StimuliError> {
    if per_instance == 0 {
        return Err(StimuliError::InvalidParameter("per_instance must be >= 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let mut selection = PairSelection::default();

    for (a, mask_a) in sources {
        let mut scored = Vec::new();
        for (b, mask_b) in candidates.iter().filter(|(b, _)| *b != a) {
            scored.push((b, jaccard(mask_a, mask_b)?));
        }
        if scored.is_empty() {
            selection.short_instances.push(a.clone());
            continue;
        }
        scored.sort_by(|x, y| y.1.total_cmp(&x.1).then_with(|| x.0.cmp(y.0)));

        let best = scored[0].1;
        let top = scored.iter().take_while(|(_, j)| *j >= best - tie_epsilon).count();
        let chosen: Vec<(&String, f64)> = if top > per_instance {
            let mut picks: Vec<usize> = sample(&mut rng, top, per_instance).into_vec();
            picks.sort_unstable();
            picks.into_iter().map(|i| scored[i]).collect()
        } else {
            if scored.len() < per_instance {
                selection.short_instances.push(a.clone());
            }
            scored.into_iter().take(per_instance).collect()
        };
        selection.pairs.extend(chosen.into_iter().map(|(b, j)| InstancePair {
            a: a.clone(),
            b: b.clone(),
            jaccard: j,
        }));
    }
    Ok(selection)
}

/// Partner selection within one pool of masks: every instance is matched
/// against all other instances.
pub fn select_pairs(
    masks: &BTreeMap<String, ObjectMask>,
    per_instance: usize,
    rng_seed: u64,
) -> Result<PairSelection, StimuliError> {
    if masks.len() < 2 {
        return Err(StimuliError::InvalidParameter(format!(
            "pair selection needs at least 2 masks, got {}",
            masks.len()
        )));
    }
    select_partners(masks, masks, per_instance, TIE_EPSILON, rng_seed)
}
