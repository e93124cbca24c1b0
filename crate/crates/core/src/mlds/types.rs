use super::MldsError;
use serde::{Deserialize, Serialize};
use std::fmt;

/// Number of frames in a blended sequence (nominal values 0, 1/6, ..., 1).
pub const SEQUENCE_LEN: usize = 7;

/// Fitted perceptual scale: seven anchored, non-decreasing values plus the
/// decision-noise `σ` (the noise factor fitted alongside the scale).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawScale")]
pub struct PerceptualScale {
    values: [f64; SEQUENCE_LEN],
    noise_sigma: f64,
    n_responses: usize,
}

#[derive(Deserialize)]
struct RawScale {
    values: [f64; SEQUENCE_LEN],
    noise_sigma: f64,
    #[serde(default)]
    n_responses: usize,
}

impl TryFrom<RawScale> for PerceptualScale {
    type Error = MldsError;

    fn try_from(raw: RawScale) -> Result<Self, Self::Error> {
        Ok(PerceptualScale::new(raw.values, raw.noise_sigma)?.with_responses(raw.n_responses))
    }
}

impl PerceptualScale {
    pub fn new(values: [f64; SEQUENCE_LEN], noise_sigma: f64) -> Result<Self, MldsError> {
        if values[0] != 0.0 || values[SEQUENCE_LEN - 1] != 1.0 {
            return Err(MldsError::InvalidScale(format!(
                "anchors must be exactly 0 and 1, got {} and {}",
                values[0],
                values[SEQUENCE_LEN - 1]
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(MldsError::InvalidScale("non-finite value".into()));
        }
        if let Some(w) = values.windows(2).position(|w| w[1] < w[0]) {
            return Err(MldsError::InvalidScale(format!(
                "values decrease between positions {w} and {}",
                w + 1
            )));
        }
        if !(noise_sigma.is_finite() && noise_sigma > 0.0) {
            return Err(MldsError::InvalidScale(format!(
                "noise sigma must be positive and finite, got {noise_sigma}"
            )));
        }
        Ok(Self {
            values,
            noise_sigma,
            n_responses: 0,
        })
    }

    /// The equally spaced scale `i / 6`.
    pub fn linear(noise_sigma: f64) -> Result<Self, MldsError> {
        Self::from_fn(|t| t, noise_sigma)
    }

    /// Builds `ψᵢ = f(i / 6)`; `f` must map 0 to 0 and 1 to 1.
    pub fn from_fn(f: impl Fn(f64) -> f64, noise_sigma: f64) -> Result<Self, MldsError> {
        let mut values = [0.0; SEQUENCE_LEN];
        for (i, v) in values.iter_mut().enumerate() {
            *v = f(i as f64 / (SEQUENCE_LEN - 1) as f64);
        }
        Self::new(values, noise_sigma)
    }

    pub fn with_responses(mut self, n_responses: usize) -> Self {
        self.n_responses = n_responses;
        self
    }

    pub fn values(&self) -> &[f64; SEQUENCE_LEN] {
        &self.values
    }

    pub fn noise_sigma(&self) -> f64 {
        self.noise_sigma
    }

    pub fn n_responses(&self) -> usize {
        self.n_responses
    }

    /// Mirror image `ψ′ᵢ = 1 − ψ₆₋ᵢ`, the scale of the reversed sequence.
    pub fn reflected(&self) -> Self {
        let mut values = [0.0; SEQUENCE_LEN];
        for (i, v) in values.iter_mut().enumerate() {
            *v = 1.0 - self.values[SEQUENCE_LEN - 1 - i];
        }
        Self {
            values,
            noise_sigma: self.noise_sigma,
            n_responses: self.n_responses,
        }
    }
}

/// Four sequence positions defining the pairs `(i, j)` and `(k, l)`.
///
/// Pairs are ordered and do not interleave: `i < j ≤ k < l`. Whether the
/// positions exist in a given sequence is checked by the consumer.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "[u8; 4]", into = "[u8; 4]")]
pub struct Quadruple {
    i: u8,
    j: u8,
    k: u8,
    l: u8,
}

impl Quadruple {
    pub fn new(i: u8, j: u8, k: u8, l: u8) -> Result<Self, MldsError> {
        if i < j && j <= k && k < l {
            Ok(Self { i, j, k, l })
        } else {
            Err(MldsError::MalformedResponse(format!(
                "quadruple ({i},{j},{k},{l}) violates i < j <= k < l"
            )))
        }
    }

    pub fn first(&self) -> (usize, usize) {
        (self.i as usize, self.j as usize)
    }

    pub fn second(&self) -> (usize, usize) {
        (self.k as usize, self.l as usize)
    }

    pub fn indices(&self) -> [usize; 4] {
        [self.i as usize, self.j as usize, self.k as usize, self.l as usize]
    }

    pub fn is_strict(&self) -> bool {
        self.j < self.k
    }

    pub fn max_index(&self) -> usize {
        self.l as usize
    }
}

impl TryFrom<[u8; 4]> for Quadruple {
    type Error = MldsError;

    fn try_from([i, j, k, l]: [u8; 4]) -> Result<Self, Self::Error> {
        Quadruple::new(i, j, k, l)
    }
}

impl From<Quadruple> for [u8; 4] {
    fn from(q: Quadruple) -> Self {
        [q.i, q.j, q.k, q.l]
    }
}

impl fmt::Display for Quadruple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{};{},{})", self.i, self.j, self.k, self.l)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Choice {
    FirstPairMoreSimilar,
    SecondPairMoreSimilar,
}

impl Choice {
    pub fn flipped(self) -> Self {
        match self {
            Choice::FirstPairMoreSimilar => Choice::SecondPairMoreSimilar,
            Choice::SecondPairMoreSimilar => Choice::FirstPairMoreSimilar,
        }
    }

    pub(crate) fn slot(self) -> usize {
        match self {
            Choice::FirstPairMoreSimilar => 0,
            Choice::SecondPairMoreSimilar => 1,
        }
    }
}

/// Ordered pair of object classes `(A, B)`; the sequence blends from A to B.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ClassPair(pub String, pub String);

impl ClassPair {
    pub const SEPARATOR: &'static str = "__";

    pub fn new(a: impl Into<String>, b: impl Into<String>) -> Self {
        Self(a.into(), b.into())
    }

    /// Directory-safe label `A__B`.
    pub fn label(&self) -> String {
        format!("{}{}{}", self.0, Self::SEPARATOR, self.1)
    }

    pub fn parse_label(label: &str) -> Option<Self> {
        let (a, b) = label.split_once(Self::SEPARATOR)?;
        (!a.is_empty() && !b.is_empty()).then(|| Self::new(a, b))
    }
}

impl fmt::Display for ClassPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.0, self.1)
    }
}

/// One 2AFC choice, stored in canonical form.
///
/// `presentation_seed` determines how the trial was shown (pair order and
/// left/right placement, see `trials::Presentation`); `choice` is always
/// expressed against the canonical quadruple.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrialResponse {
    pub sequence_id: String,
    pub class_pair: ClassPair,
    pub quadruple: Quadruple,
    pub choice: Choice,
    pub observer_id: String,
    pub presentation_seed: u32,
    pub timestamp: u64,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scale_anchors_enforced() {
        assert!(PerceptualScale::new([0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 1.0], 1.0).is_err());
        assert!(PerceptualScale::new([0.0, 0.2, 0.3, 0.4, 0.5, 0.6, 0.9], 1.0).is_err());
        assert!(PerceptualScale::new([0.0, 0.3, 0.2, 0.4, 0.5, 0.6, 1.0], 1.0).is_err());
        assert!(PerceptualScale::new([0.0, 0.2, 0.3, 0.4, 0.5, 0.6, 1.0], 0.0).is_err());
        assert!(PerceptualScale::new([0.0, 0.2, 0.3, 0.4, 0.5, 0.6, 1.0], f64::NAN).is_err());
        // flat stretches are allowed
        assert!(PerceptualScale::new([0.0, 0.0, 0.0, 0.5, 0.5, 1.0, 1.0], 0.3).is_ok());
    }

    #[test]
    fn scale_deserialization_validates() {
        let bad = r#"{"values":[0,0.5,0.4,0.6,0.7,0.8,1],"noise_sigma":0.1,"n_responses":3}"#;
        assert!(serde_json::from_str::<PerceptualScale>(bad).is_err());
        let good = r#"{"values":[0,0.1,0.2,0.6,0.7,0.8,1],"noise_sigma":0.1,"n_responses":3}"#;
        let s: PerceptualScale = serde_json::from_str(good).unwrap();
        assert_eq!(s.n_responses(), 3);
    }

    #[test]
    fn quadruple_ordering() {
        assert!(Quadruple::new(0, 1, 2, 3).is_ok());
        assert!(Quadruple::new(0, 2, 2, 3).is_ok());
        assert!(!Quadruple::new(0, 2, 2, 3).unwrap().is_strict());
        assert!(Quadruple::new(0, 2, 1, 3).is_err());
        assert!(Quadruple::new(1, 1, 2, 3).is_err());
        assert!(serde_json::from_str::<Quadruple>("[3,2,1,0]").is_err());
        assert_eq!(
            serde_json::to_string(&Quadruple::new(0, 1, 5, 6).unwrap()).unwrap(),
            "[0,1,5,6]"
        );
    }

    #[test]
    fn response_key_order_is_fixed() {
        let r = TrialResponse {
            sequence_id: "s".into(),
            class_pair: ClassPair::new("a", "b"),
            quadruple: Quadruple::new(0, 1, 2, 3).unwrap(),
            choice: Choice::SecondPairMoreSimilar,
            observer_id: "o".into(),
            presentation_seed: 9,
            timestamp: 12,
        };
        assert_eq!(
            serde_json::to_string(&r).unwrap(),
            r#"{"sequence_id":"s","class_pair":["a","b"],"quadruple":[0,1,2,3],"choice":"SecondPairMoreSimilar","observer_id":"o","presentation_seed":9,"timestamp":12}"#
        );
    }

    #[test]
    fn class_pair_label_round_trip() {
        let cp = ClassPair::new("02691156", "02958343");
        assert_eq!(ClassPair::parse_label(&cp.label()), Some(cp));
        assert_eq!(ClassPair::parse_label("nope"), None);
    }
}
