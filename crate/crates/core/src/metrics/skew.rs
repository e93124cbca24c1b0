use crate::mlds::{ClassPair, PerceptualScale};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::collections::BTreeMap;

/// `SB = -2 * ((sum(psi) - 1) / 5 - 1/2)` over the seven scale values.
///
/// With anchors at 0 and 1 this is `1 - 2 * mean(interior)`, so a scale that
/// rises early (interior above the diagonal) has negative skewness.
pub fn skewness(scale: &PerceptualScale) -> f64 {
    let sum: f64 = scale.values().iter().sum();
    -2.0 * ((sum - 1.0) / 5.0 - 0.5)
}

/// Skewness values of one observer keyed by class pair.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SkewnessSet {
    pub observer_id: String,
    pub entries: BTreeMap<ClassPair, f64>,
}

impl SkewnessSet {
    pub fn new(observer_id: impl Into<String>) -> Self {
        Self {
            observer_id: observer_id.into(),
            entries: BTreeMap::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        self.entries.values().copied()
    }

    /// Same set with every value sign-flipped.
    pub fn negated(&self) -> Self {
        Self {
            observer_id: self.observer_id.clone(),
            entries: self.entries.iter().map(|(k, v)| (k.clone(), -v)).collect(),
        }
    }
}

pub fn skewness_set<'a>(
    observer_id: impl Into<String>,
    scales: impl IntoIterator<Item = (&'a ClassPair, &'a PerceptualScale)>,
) -> SkewnessSet {
    SkewnessSet {
        observer_id: observer_id.into(),
        entries: scales
            .into_iter()
            .map(|(cp, s)| (cp.clone(), skewness(s)))
            .collect(),
    }
}

#[derive(Serialize, Deserialize)]
struct Entry {
    class_pair: ClassPair,
    sb: f64,
}

#[derive(Serialize, Deserialize)]
struct Wire {
    observer_id: String,
    entries: Vec<Entry>,
}

impl Serialize for SkewnessSet {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        Wire {
            observer_id: self.observer_id.clone(),
            entries: self
                .entries
                .iter()
                .map(|(cp, sb)| Entry {
                    class_pair: cp.clone(),
                    sb: *sb,
                })
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for SkewnessSet {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let wire = Wire::deserialize(d)?;
        let mut entries = BTreeMap::new();
        for e in wire.entries {
            if !e.sb.is_finite() {
                return Err(serde::de::Error::custom(format!(
                    "non-finite skewness for {}",
                    e.class_pair
                )));
            }
            if entries.insert(e.class_pair.clone(), e.sb).is_some() {
                return Err(serde::de::Error::custom(format!(
                    "duplicate class pair {}",
                    e.class_pair
                )));
            }
        }
        Ok(Self {
            observer_id: wire.observer_id,
            entries,
        })
    }
}
