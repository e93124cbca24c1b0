use super::{MetricsError, SkewnessSet};
use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

pub const DEFAULT_BINS: usize = 20;
const MIN_EXPECTED: f64 = 5.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChiSquaredResult {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
    /// Bins left after merging sparse neighbours.
    pub effective_bins: usize,
}

/// Pearson's statistic `sum (O - E)^2 / E`.
pub fn pearson_statistic(observed: &[f64], expected: &[f64]) -> Result<f64, MetricsError> {
    if observed.len() != expected.len() || expected.is_empty() {
        return Err(MetricsError::InvalidParameter(
            "observed and expected counts must be non-empty and equally long".into(),
        ));
    }
    if expected.iter().any(|e| !(e.is_finite() && *e > 0.0)) {
        return Err(MetricsError::InvalidParameter("expected counts must be positive".into()));
    }
    Ok(observed
        .iter()
        .zip(expected)
        .map(|(o, e)| (o - e) * (o - e) / e)
        .sum())
}

/// Tests whether the observed skewness values are distributed like values
/// from a Monte Carlo null (random-responder scales).
///
/// Bin edges are the null's `bins`-quantiles, so each bin holds roughly the
/// same share of the null. Expected counts scale the null histogram to the
/// observed sample size; adjacent bins are merged left to right until every
/// expected count reaches 5.
pub fn chi_squared_null_test(
    observed: &SkewnessSet,
    null_samples: &[SkewnessSet],
    bins: usize,
) -> Result<ChiSquaredResult, MetricsError> {
    if bins < 2 {
        return Err(MetricsError::InvalidParameter(format!("need at least 2 bins, got {bins}")));
    }
    let mut null: Vec<f64> = null_samples.iter().flat_map(|s| s.values()).collect();
    let obs: Vec<f64> = observed.values().collect();
    if obs.is_empty() {
        return Err(MetricsError::InvalidParameter("observed set is empty".into()));
    }
    if null.len() < bins {
        return Err(MetricsError::InvalidParameter(format!(
            "{} null values cannot fill {bins} bins",
            null.len()
        )));
    }
    if null.iter().chain(&obs).any(|v| !v.is_finite()) {
        return Err(MetricsError::InvalidParameter("non-finite skewness value".into()));
    }
    null.sort_by(f64::total_cmp);

    let mut edges: Vec<f64> = (1..bins).map(|c| null[c * null.len() / bins]).collect();
    edges.dedup();
    let bin_of = |v: f64| edges.partition_point(|e| *e <= v);
    let n_raw = edges.len() + 1;
    let mut null_counts = vec![0usize; n_raw];
    for v in &null {
        null_counts[bin_of(*v)] += 1;
    }
    let mut obs_counts = vec![0usize; n_raw];
    for v in &obs {
        obs_counts[bin_of(*v)] += 1;
    }

    let scale = obs.len() as f64 / null.len() as f64;
    let mut expected = Vec::new();
    let mut observed_m = Vec::new();
    let (mut acc_e, mut acc_o) = (0.0, 0.0);
    for b in 0..n_raw {
        acc_e += null_counts[b] as f64 * scale;
        acc_o += obs_counts[b] as f64;
        if acc_e >= MIN_EXPECTED {
            expected.push(acc_e);
            observed_m.push(acc_o);
            acc_e = 0.0;
            acc_o = 0.0;
        }
    }
    if acc_e > 0.0 || acc_o > 0.0 {
        match (expected.last_mut(), observed_m.last_mut()) {
            (Some(e), Some(o)) => {
                *e += acc_e;
                *o += acc_o;
            }
            _ => {
                expected.push(acc_e);
                observed_m.push(acc_o);
            }
        }
    }
    if expected.len() < 2 {
        return Err(MetricsError::InvalidParameter(format!(
            "binning degenerates to {} bin(s) with expected counts of at least {MIN_EXPECTED}",
            expected.len()
        )));
    }

    let statistic = pearson_statistic(&observed_m, &expected)?;
    let dof = expected.len() - 1;
    let dist = ChiSquared::new(dof as f64).expect("dof is positive");
    Ok(ChiSquaredResult {
        statistic,
        dof,
        p_value: dist.sf(statistic).clamp(0.0, 1.0),
        effective_bins: expected.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mlds::ClassPair;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    fn set(values: impl IntoIterator<Item = f64>) -> SkewnessSet {
        SkewnessSet {
            observer_id: "x".into(),
            entries: values
                .into_iter()
                .enumerate()
                .map(|(i, v)| (ClassPair::new(format!("a{i}"), format!("b{i}")), v))
                .collect(),
        }
    }

    fn normals(rng: &mut ChaCha8Rng, n: usize, mean: f64, sd: f64) -> Vec<f64> {
        (0..n).map(|_| mean + sd * rng.sample::<f64, _>(StandardNormal)).collect()
    }

    #[test]
    fn identical_histograms_give_zero_statistic() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let v = normals(&mut rng, 400, 0.0, 0.2);
        let r = chi_squared_null_test(&set(v.clone()), &[set(v)], 20).unwrap();
        assert!(r.statistic.abs() < 1e-12);
        assert!((r.p_value - 1.0).abs() < 1e-12);
        assert_eq!(r.dof, 19);
    }

    #[test]
    fn shifted_sample_is_rejected() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let null = set(normals(&mut rng, 20_000, 0.0, 0.17));
        let obs = set(normals(&mut rng, 1000, 0.4, 0.1));
        let r = chi_squared_null_test(&obs, &[null], 20).unwrap();
        assert!(r.p_value < 1e-3);
    }

    #[test]
    fn sparse_bins_merge() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let null = set(normals(&mut rng, 5000, 0.0, 1.0));
        let obs = set(normals(&mut rng, 30, 0.0, 1.0));
        let r = chi_squared_null_test(&obs, &[null], 20).unwrap();
        // 30 observations support at most six bins of expected count 5.
        assert!(r.effective_bins <= 6 && r.effective_bins >= 2);
        assert_eq!(r.dof, r.effective_bins - 1);
    }

    #[test]
    fn degenerate_binning_is_rejected() {
        let null = set(vec![0.0; 100]);
        let obs = set(vec![0.0; 100]);
        assert!(matches!(
            chi_squared_null_test(&obs, std::slice::from_ref(&null), 20),
            Err(MetricsError::InvalidParameter(_))
        ));
        assert!(chi_squared_null_test(&obs, std::slice::from_ref(&null), 1).is_err());
        assert!(chi_squared_null_test(&set(vec![0.0; 3]), &[set(vec![0.1, 0.2])], 20).is_err());
        assert!(chi_squared_null_test(&set(vec![]), &[null], 20).is_err());
    }

    #[test]
    fn held_out_null_is_calibrated() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let null = set(normals(&mut rng, 100_000, 0.0, 0.17));
        let mut rejections = 0;
        for _ in 0..200 {
            let obs = set(normals(&mut rng, 200, 0.0, 0.17));
            if chi_squared_null_test(&obs, std::slice::from_ref(&null), 20).unwrap().p_value < 0.01 {
                rejections += 1;
            }
        }
        // Binomial(200, 0.01): mean 2, P(X > 8) < 1e-3.
        assert!(rejections <= 8, "{rejections}");
    }

    proptest! {
        #[test]
        fn statistic_ignores_bin_labels(
            pairs in proptest::collection::vec((0.0f64..50.0, 0.5f64..50.0), 2..25),
            seed in any::<u64>(),
        ) {
            let (o, e): (Vec<f64>, Vec<f64>) = pairs.iter().copied().unzip();
            let mut idx: Vec<usize> = (0..o.len()).collect();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rand::seq::SliceRandom::shuffle(idx.as_mut_slice(), &mut rng);
            let po: Vec<f64> = idx.iter().map(|&i| o[i]).collect();
            let pe: Vec<f64> = idx.iter().map(|&i| e[i]).collect();
            let a = pearson_statistic(&o, &e).unwrap();
            let b = pearson_statistic(&po, &pe).unwrap();
            prop_assert!((a - b).abs() <= 1e-9 * a.max(1.0));
        }
    }
}
