//! Axiomatic validity checks run before trusting a fitted scale.

use super::types::{Choice, TrialResponse, SEQUENCE_LEN};
use super::MldsError;
use std::collections::BTreeMap;

/// Default agreement an observer must reach to pass [`ordering_check`].
pub const ORDERING_THRESHOLD: f64 = 0.75;
/// Default violation rate above which [`six_point_check`] fails.
pub const SIX_POINT_THRESHOLD: f64 = 0.05;

#[derive(Clone, Debug, PartialEq)]
pub struct OrderingReport {
    pub pass: bool,
    pub agreement: f64,
    pub n_qualifying: usize,
}

/// Agreement with the nominal order of the sequence.
///
/// A response qualifies when its two pairs span different numbers of steps
/// on the nominal scale; it is consistent when the observer picked the pair
/// with the smaller nominal gap. Adjacent-step pairs compared against wider
/// pairs are the typical qualifying trials.
pub fn ordering_check(
    responses: &[TrialResponse],
    sequence_id: &str,
    threshold: f64,
) -> Result<OrderingReport, MldsError> {
    let mut consistent = 0usize;
    let mut qualifying = 0usize;
    for r in responses.iter().filter(|r| r.sequence_id == sequence_id) {
        let (i, j) = r.quadruple.first();
        let (k, l) = r.quadruple.second();
        let (g1, g2) = (j - i, l - k);
        if g1 == g2 {
            continue;
        }
        qualifying += 1;
        let expected = if g1 < g2 {
            Choice::FirstPairMoreSimilar
        } else {
            Choice::SecondPairMoreSimilar
        };
        if r.choice == expected {
            consistent += 1;
        }
    }
    if qualifying == 0 {
        return Err(MldsError::InsufficientData(format!(
            "no responses with unequal nominal gaps for sequence {sequence_id}"
        )));
    }
    let agreement = consistent as f64 / qualifying as f64;
    Ok(OrderingReport {
        pass: agreement >= threshold,
        agreement,
        n_qualifying: qualifying,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct SixPointReport {
    pub pass: bool,
    pub violation_rate: f64,
    pub n_sets: usize,
    pub n_violations: usize,
}

type Pair = (usize, usize);

/// Majority verdicts: `key = (p, q)` with `p < q` in pair order, value
/// `true` when `p` was judged the more similar (smaller-difference) pair.
fn majority_verdicts(
    responses: &[TrialResponse],
    sequence_id: &str,
) -> BTreeMap<(Pair, Pair), bool> {
    let mut votes: BTreeMap<(Pair, Pair), i64> = BTreeMap::new();
    for r in responses.iter().filter(|r| r.sequence_id == sequence_id) {
        let (a, b) = (r.quadruple.first(), r.quadruple.second());
        let first_closer = r.choice == Choice::FirstPairMoreSimilar;
        let (key, vote) = if a < b {
            ((a, b), first_closer)
        } else {
            ((b, a), !first_closer)
        };
        *votes.entry(key).or_default() += if vote { 1 } else { -1 };
    }
    votes
        .into_iter()
        .filter(|(_, v)| *v != 0)
        .map(|(k, v)| (k, v > 0))
        .collect()
}

/// `Some(true)` when pair `a` was judged to have the smaller difference.
fn closer(verdicts: &BTreeMap<(Pair, Pair), bool>, a: Pair, b: Pair) -> Option<bool> {
    if a < b {
        verdicts.get(&(a, b)).copied()
    } else {
        verdicts.get(&(b, a)).map(|v| !v)
    }
}

fn contains(outer: Pair, inner: Pair) -> bool {
    outer != inner && outer.0 <= inner.0 && inner.1 <= outer.1
}

/// Consistency of majority choices across overlapping quadruples.
///
/// Two kinds of quadruple sets are evaluated, each of which admits a
/// monotone scale only for some combinations of verdicts:
///
/// - nesting sets: quadruples `(P, R)` and `(P, R′)` sharing pair `P`
///   where `R` lies inside `R′`. A monotone scale gives `d(R) ≤ d(R′)`, so
///   judging `R` less alike than `P` while `R′` is more alike is a
///   violation.
/// - six-point sets: triples `a < b < c` and `a′ < b′ < c′` with verdicts
///   on `(a,b)|(a′,b′)`, `(b,c)|(b′,c′)` and `(a,c)|(a′,c′)`. If the first
///   two agree in direction the third must follow.
///
/// A set counts once all of its verdicts are decisive (no tied majority).
pub fn six_point_check(
    responses: &[TrialResponse],
    sequence_id: &str,
    threshold: f64,
) -> Result<SixPointReport, MldsError> {
    let verdicts = majority_verdicts(responses, sequence_id);
    let mut sets = 0usize;
    let mut violations = 0usize;

    let judged: Vec<(Pair, Pair)> = verdicts.keys().copied().collect();
    // nesting sets
    for &(p1, p2) in &judged {
        for (shared, other) in [(p1, p2), (p2, p1)] {
            for &(q1, q2) in &judged {
                for (shared2, wider) in [(q1, q2), (q2, q1)] {
                    if shared2 != shared || !contains(wider, other) {
                        continue;
                    }
                    let (Some(other_closer), Some(wider_closer)) = (
                        closer(&verdicts, other, shared),
                        closer(&verdicts, wider, shared),
                    ) else {
                        continue;
                    };
                    sets += 1;
                    if !other_closer && wider_closer {
                        violations += 1;
                    }
                }
            }
        }
    }

    // six-point sets
    let n = SEQUENCE_LEN;
    for a in 0..n {
        for b in a + 1..n {
            for c in b + 1..n {
                for a2 in 0..n {
                    for b2 in a2 + 1..n {
                        for c2 in b2 + 1..n {
                            if (a, b, c) >= (a2, b2, c2) {
                                continue;
                            }
                            let verdict = (
                                closer(&verdicts, (a, b), (a2, b2)),
                                closer(&verdicts, (b, c), (b2, c2)),
                                closer(&verdicts, (a, c), (a2, c2)),
                            );
                            let (Some(lower), Some(upper), Some(span)) = verdict else {
                                continue;
                            };
                            sets += 1;
                            if lower == upper && span != lower {
                                violations += 1;
                            }
                        }
                    }
                }
            }
        }
    }

    if sets == 0 {
        return Err(MldsError::InsufficientData(format!(
            "no overlapping quadruple sets with decisive majorities for sequence {sequence_id}"
        )));
    }
    let violation_rate = violations as f64 / sets as f64;
    Ok(SixPointReport {
        pass: violation_rate <= threshold,
        violation_rate,
        n_sets: sets,
        n_violations: violations,
    })
}
