use super::ObserverError;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::io::BufRead;
use std::path::Path;

/// Feature vector for one image. Values are stored as `f32` so that the
/// shortest decimal form written to a manifest reads back exactly.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Embedding {
    pub image_id: String,
    pub dim: usize,
    pub values: Vec<f32>,
}

impl Embedding {
    pub fn new(image_id: impl Into<String>, values: Vec<f32>) -> Result<Self, ObserverError> {
        let e = Self {
            image_id: image_id.into(),
            dim: values.len(),
            values,
        };
        e.validate()?;
        Ok(e)
    }

    pub fn validate(&self) -> Result<(), ObserverError> {
        if self.dim == 0 || self.dim != self.values.len() {
            return Err(ObserverError::MalformedEmbedding(format!(
                "{}: dim {} with {} values",
                self.image_id,
                self.dim,
                self.values.len()
            )));
        }
        if self.values.iter().any(|v| !v.is_finite()) {
            return Err(ObserverError::MalformedEmbedding(format!(
                "{}: non-finite value",
                self.image_id
            )));
        }
        Ok(())
    }
}

pub fn l2_distance(x: &Embedding, y: &Embedding) -> Result<f64, ObserverError> {
    if x.values.len() != y.values.len() {
        return Err(ObserverError::MalformedEmbedding(format!(
            "cannot compare dim {} ({}) with dim {} ({})",
            x.values.len(),
            x.image_id,
            y.values.len(),
            y.image_id
        )));
    }
    Ok(x.values
        .iter()
        .zip(&y.values)
        .map(|(a, b)| {
            let d = *a as f64 - *b as f64;
            d * d
        })
        .sum::<f64>()
        .sqrt())
}

/// Validated embedding manifest: unique ids, one dimension throughout.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Manifest {
    entries: BTreeMap<String, Embedding>,
}

impl Manifest {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn dim(&self) -> Option<usize> {
        self.entries.values().next().map(|e| e.dim)
    }

    pub fn get(&self, image_id: &str) -> Option<&Embedding> {
        self.entries.get(image_id)
    }

    pub fn iter(&self) -> impl Iterator<Item = &Embedding> {
        self.entries.values()
    }
}

/// Parses manifest JSONL. Blank lines and `#` comment lines are skipped;
/// line numbers in errors are 1-based.
pub fn parse_manifest(reader: impl BufRead) -> Result<Manifest, ObserverError> {
    let mut entries = BTreeMap::new();
    let mut dim: Option<usize> = None;
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line.map_err(|e| ObserverError::ParseError {
            line: line_no,
            message: e.to_string(),
        })?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let e: Embedding = serde_json::from_str(trimmed).map_err(|e| ObserverError::ParseError {
            line: line_no,
            message: e.to_string(),
        })?;
        if e.dim != e.values.len() {
            return Err(ObserverError::ParseError {
                line: line_no,
                message: format!("dim {} but {} values", e.dim, e.values.len()),
            });
        }
        e.validate().map_err(|err| ObserverError::ParseError {
            line: line_no,
            message: err.to_string(),
        })?;
        match dim {
            Some(expected) if expected != e.dim => {
                return Err(ObserverError::DimMismatch {
                    line: line_no,
                    expected,
                    found: e.dim,
                })
            }
            _ => dim = Some(e.dim),
        }
        if entries.contains_key(&e.image_id) {
            return Err(ObserverError::DuplicateId {
                id: e.image_id,
                line: line_no,
            });
        }
        entries.insert(e.image_id.clone(), e);
    }
    Ok(Manifest { entries })
}

pub fn load_manifest(path: &Path) -> Result<Manifest, ObserverError> {
    let file = std::fs::File::open(path).map_err(|source| ObserverError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_manifest(std::io::BufReader::new(file))
}
