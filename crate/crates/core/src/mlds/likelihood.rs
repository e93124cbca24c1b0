use super::types::{Choice, PerceptualScale, Quadruple, TrialResponse, SEQUENCE_LEN};
use super::MldsError;
use crate::normal::{inverse_mills, log_normal_cdf};
use std::collections::BTreeMap;

/// Responses collapsed to per-quadruple counts of each choice.
///
/// Every response carries equal weight; the map is ordered so sums are
/// evaluated in a fixed order.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ResponseTally {
    counts: BTreeMap<Quadruple, [u64; 2]>,
    total: usize,
}

impl ResponseTally {
    pub fn from_responses<'a>(
        responses: impl IntoIterator<Item = &'a TrialResponse>,
    ) -> Result<Self, MldsError> {
        let mut tally = ResponseTally::default();
        for r in responses {
            tally.add(r.quadruple, r.choice)?;
        }
        if tally.total == 0 {
            return Err(MldsError::InsufficientData("no responses".into()));
        }
        Ok(tally)
    }

    pub fn add(&mut self, q: Quadruple, choice: Choice) -> Result<(), MldsError> {
        if q.max_index() >= SEQUENCE_LEN {
            return Err(MldsError::MalformedResponse(format!(
                "quadruple {q} has a position outside 0..{}",
                SEQUENCE_LEN - 1
            )));
        }
        self.counts.entry(q).or_default()[choice.slot()] += 1;
        self.total += 1;
        Ok(())
    }

    pub fn total(&self) -> usize {
        self.total
    }

    pub fn distinct_quadruples(&self) -> usize {
        self.counts.len()
    }

    /// `(quadruple, [first_count, second_count])` in quadruple order.
    pub fn iter(&self) -> impl Iterator<Item = (Quadruple, [u64; 2])> + '_ {
        self.counts.iter().map(|(q, c)| (*q, *c))
    }

    /// Positions touched by at least one response.
    pub fn covered_positions(&self) -> [bool; SEQUENCE_LEN] {
        let mut seen = [false; SEQUENCE_LEN];
        for q in self.counts.keys() {
            for idx in q.indices() {
                seen[idx] = true;
            }
        }
        seen
    }

    pub(crate) fn log_likelihood_at(&self, psi: &[f64; SEQUENCE_LEN], sigma: f64) -> f64 {
        self.counts
            .iter()
            .map(|(q, &[n_first, n_second])| {
                let z = standardized_gap(psi, q.first(), q.second(), sigma);
                let mut ll = 0.0;
                if n_first > 0 {
                    ll += n_first as f64 * log_normal_cdf(z);
                }
                if n_second > 0 {
                    ll += n_second as f64 * log_normal_cdf(-z);
                }
                ll
            })
            .sum()
    }

    /// Partial derivatives with respect to all seven positions and `σ`.
    pub(crate) fn gradient_at(
        &self,
        psi: &[f64; SEQUENCE_LEN],
        sigma: f64,
    ) -> ([f64; SEQUENCE_LEN], f64) {
        let mut d_psi = [0.0; SEQUENCE_LEN];
        let mut d_sigma = 0.0;
        for (q, &[n_first, n_second]) in &self.counts {
            let (i, j) = q.first();
            let (k, l) = q.second();
            let z = standardized_gap(psi, (i, j), (k, l), sigma);
            let mut d_z = 0.0;
            if n_first > 0 {
                d_z += n_first as f64 * inverse_mills(z);
            }
            if n_second > 0 {
                d_z -= n_second as f64 * inverse_mills(-z);
            }
            let s1 = unit_sign(psi[j] - psi[i]);
            let s2 = unit_sign(psi[l] - psi[k]);
            d_psi[l] += d_z * s2 / sigma;
            d_psi[k] -= d_z * s2 / sigma;
            d_psi[j] -= d_z * s1 / sigma;
            d_psi[i] += d_z * s1 / sigma;
            d_sigma -= d_z * z / sigma;
        }
        (d_psi, d_sigma)
    }
}

fn unit_sign(x: f64) -> f64 {
    if x < 0.0 {
        -1.0
    } else {
        1.0
    }
}

fn standardized_gap(
    psi: &[f64; SEQUENCE_LEN],
    (i, j): (usize, usize),
    (k, l): (usize, usize),
    sigma: f64,
) -> f64 {
    let d1 = (psi[j] - psi[i]).abs();
    let d2 = (psi[l] - psi[k]).abs();
    (d2 - d1) / sigma
}

/// Log-probability of `choice` for an arbitrary pair of pairs.
///
/// Unlike [`Quadruple`], the pairs may come in either order, which is what
/// a presentation with swapped pairs looks like before canonicalisation.
pub fn pair_log_prob(
    scale: &PerceptualScale,
    first: (usize, usize),
    second: (usize, usize),
    choice: Choice,
) -> f64 {
    let z = standardized_gap(scale.values(), first, second, scale.noise_sigma());
    match choice {
        Choice::FirstPairMoreSimilar => log_normal_cdf(z),
        Choice::SecondPairMoreSimilar => log_normal_cdf(-z),
    }
}

/// Sum over responses of `log P(choice | scale)` under the Gaussian
/// difference model.
pub fn log_likelihood(
    scale: &PerceptualScale,
    responses: &[TrialResponse],
) -> Result<f64, MldsError> {
    let tally = ResponseTally::from_responses(responses)?;
    Ok(tally.log_likelihood_at(scale.values(), scale.noise_sigma()))
}

/// Gradient of [`log_likelihood`] over the free parameters: the interior
/// values `ψ₁..ψ₅` and the noise `σ`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScaleGradient {
    pub psi: [f64; SEQUENCE_LEN - 2],
    pub sigma: f64,
}

pub fn grad_log_likelihood(
    scale: &PerceptualScale,
    responses: &[TrialResponse],
) -> Result<ScaleGradient, MldsError> {
    let tally = ResponseTally::from_responses(responses)?;
    let (d_psi, sigma) = tally.gradient_at(scale.values(), scale.noise_sigma());
    let mut psi = [0.0; SEQUENCE_LEN - 2];
    psi.copy_from_slice(&d_psi[1..SEQUENCE_LEN - 1]);
    Ok(ScaleGradient { psi, sigma })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mlds::ClassPair;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn response(q: [u8; 4], choice: Choice) -> TrialResponse {
        TrialResponse {
            sequence_id: "seq".into(),
            class_pair: ClassPair::new("a", "b"),
            quadruple: Quadruple::try_from(q).unwrap(),
            choice,
            observer_id: "t".into(),
            presentation_seed: 0,
            timestamp: 0,
        }
    }

    /// erf Maclaurin series, kept separate from the implementation path.
    fn cdf_oracle(x: f64) -> f64 {
        let y = x / 2f64.sqrt();
        let (mut term, mut sum) = (y, y);
        for n in 1..200 {
            term *= -y * y / n as f64;
            sum += term / (2 * n + 1) as f64;
        }
        0.5 * (1.0 + sum * 2.0 / std::f64::consts::PI.sqrt())
    }

    fn random_scale(rng: &mut ChaCha8Rng) -> PerceptualScale {
        let mut inc: Vec<f64> = (0..6).map(|_| rng.random_range(0.05..1.0)).collect();
        let total: f64 = inc.iter().sum();
        inc.iter_mut().for_each(|v| *v /= total);
        let mut values = [0.0; 7];
        for i in 1..6 {
            values[i] = values[i - 1] + inc[i - 1];
        }
        values[6] = 1.0;
        PerceptualScale::new(values, rng.random_range(0.05..0.5)).unwrap()
    }

    #[test]
    fn symmetric_quadruple_is_a_coin_flip() {
        let scale = PerceptualScale::linear(1.0).unwrap();
        let ll = log_likelihood(&scale, &[response([0, 1, 5, 6], Choice::FirstPairMoreSimilar)])
            .unwrap();
        assert!((ll - 0.5f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn asymmetric_quadruple_matches_erf_oracle() {
        let scale = PerceptualScale::linear(1.0).unwrap();
        let ll = log_likelihood(&scale, &[response([0, 3, 5, 6], Choice::SecondPairMoreSimilar)])
            .unwrap();
        let expected = cdf_oracle(1.0 / 3.0).ln();
        assert!((ll - expected).abs() < 1e-12, "{ll} vs {expected}");
    }

    #[test]
    fn complementary_choices_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let scale = random_scale(&mut rng);
        let q = [0, 2, 3, 6];
        let both = [
            response(q, Choice::FirstPairMoreSimilar),
            response(q, Choice::SecondPairMoreSimilar),
        ];
        let ll = log_likelihood(&scale, &both).unwrap();
        let v = scale.values();
        let z = ((v[6] - v[3]) - (v[2] - v[0])) / scale.noise_sigma();
        let expected = cdf_oracle(z).ln() + cdf_oracle(-z).ln();
        assert!((ll - expected).abs() < 1e-9 * expected.abs(), "{ll} vs {expected}");
    }

    #[test]
    fn errors() {
        let scale = PerceptualScale::linear(1.0).unwrap();
        assert!(matches!(
            log_likelihood(&scale, &[]),
            Err(MldsError::InsufficientData(_))
        ));
        assert!(matches!(
            log_likelihood(&scale, &[response([0, 1, 5, 7], Choice::FirstPairMoreSimilar)]),
            Err(MldsError::MalformedResponse(_))
        ));
        assert!(matches!(
            grad_log_likelihood(&scale, &[]),
            Err(MldsError::InsufficientData(_))
        ));
    }

    #[test]
    fn sigma_gradient_vanishes_at_half() {
        let scale = PerceptualScale::linear(1.0).unwrap();
        let g = grad_log_likelihood(&scale, &[response([0, 1, 5, 6], Choice::FirstPairMoreSimilar)])
            .unwrap();
        assert!(g.sigma.abs() < 1e-12);
    }

    #[test]
    fn presentation_symmetry() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let scale = random_scale(&mut rng);
            let a = pair_log_prob(&scale, (1, 2), (4, 6), Choice::FirstPairMoreSimilar);
            let b = pair_log_prob(&scale, (4, 6), (1, 2), Choice::SecondPairMoreSimilar);
            assert_eq!(a, b);
        }
    }

    #[test]
    fn duplicated_responses_double_the_gradient() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let scale = random_scale(&mut rng);
        let quads = crate::trials::enumerate_quadruples(7).unwrap();
        let responses: Vec<_> = (0..100)
            .map(|_| {
                let q = quads[rng.random_range(0..quads.len())];
                let c = if rng.random_bool(0.5) {
                    Choice::FirstPairMoreSimilar
                } else {
                    Choice::SecondPairMoreSimilar
                };
                response(q.into(), c)
            })
            .collect();
        let mut doubled = responses.clone();
        doubled.extend(responses.iter().cloned());
        let g1 = grad_log_likelihood(&scale, &responses).unwrap();
        let g2 = grad_log_likelihood(&scale, &doubled).unwrap();
        for (a, b) in g1.psi.iter().zip(g2.psi.iter()) {
            assert_eq!(2.0 * a, *b);
        }
        assert_eq!(2.0 * g1.sigma, g2.sigma);
    }
}
