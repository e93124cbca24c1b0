use crate::metrics::{skewness, SkewnessSet};
use crate::mlds::{fit_mlds, Choice, ClassPair, FitConfig, TrialResponse};
use crate::trials::enumerate_quadruples;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Coin-flip responses for one class pair, cycling through the strict
/// quadruples so every quadruple is asked equally often.
pub fn simulate_random_responses(
    class_pair: &ClassPair,
    n_responses: usize,
    rng: &mut impl Rng,
) -> Vec<TrialResponse> {
    let quads = enumerate_quadruples(7).expect("seven positions");
    let sequence_id = format!("{}/random", class_pair.label());
    (0..n_responses)
        .map(|n| TrialResponse {
            sequence_id: sequence_id.clone(),
            class_pair: class_pair.clone(),
            quadruple: quads[n % quads.len()],
            choice: if rng.random_bool(0.5) {
                Choice::FirstPairMoreSimilar
            } else {
                Choice::SecondPairMoreSimilar
            },
            observer_id: "random".into(),
            presentation_seed: 0,
            timestamp: n as u64,
        })
        .collect()
}

/// Skewness sets of `n_sets` independent random responders, each fitted
/// through the same MLDS routine as real observers. Class pairs whose fit
/// fails are left out of that set.
pub fn random_null_sets(
    class_pairs: &[ClassPair],
    n_sets: usize,
    responses_per_pair: usize,
    seed: u64,
    config: &FitConfig,
) -> Vec<SkewnessSet> {
    (0..n_sets)
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(k as u64);
            let mut set = SkewnessSet::new(format!("random-null-{k}"));
            for cp in class_pairs {
                let rs = simulate_random_responses(cp, responses_per_pair, &mut rng);
                if let Ok(fit) = fit_mlds(&rs, config) {
                    set.entries.insert(cp.clone(), skewness(&fit.scale));
                }
            }
            set
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn random_sets_are_reproducible_and_distinct() {
        let cps: Vec<ClassPair> = (0..4).map(|i| ClassPair::new(format!("a{i}"), "b")).collect();
        let cfg = FitConfig::default();
        let a = random_null_sets(&cps, 2, 140, 5, &cfg);
        let b = random_null_sets(&cps, 2, 140, 5, &cfg);
        assert_eq!(a, b);
        assert_eq!(a[0].len(), 4);
        assert_ne!(a[0].entries, a[1].entries);
    }

    #[test]
    fn responses_cover_quadruples_evenly() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let rs = simulate_random_responses(&ClassPair::new("a", "b"), 70, &mut rng);
        let q0 = rs[0].quadruple;
        assert_eq!(rs.iter().filter(|r| r.quadruple == q0).count(), 2);
    }
}
