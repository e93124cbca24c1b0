//! Versioned JSON documents.
//!
//! Every JSON artifact the toolkit writes is wrapped as
//! `{"schema_version": "1", "kind": "...", ...body}` so readers can reject
//! files from incompatible releases or of the wrong kind.

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use std::path::Path;
use thiserror::Error;

pub const SCHEMA_VERSION: &str = "1";

#[derive(Debug, Error)]
pub enum DocError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Parse { path: String, message: String },
    #[error("{path}: unsupported schema_version {found:?}")]
    Version { path: String, found: String },
    #[error("{path}: expected a {expected} document, found {found}")]
    Kind {
        path: String,
        expected: String,
        found: String,
    },
}

#[derive(Serialize, Deserialize)]
struct Envelope<T> {
    schema_version: String,
    kind: String,
    #[serde(flatten)]
    body: T,
}

#[derive(Deserialize)]
struct Header {
    schema_version: String,
    kind: String,
}

pub fn to_string<T: Serialize>(kind: &str, body: &T) -> String {
    let env = Envelope {
        schema_version: SCHEMA_VERSION.to_string(),
        kind: kind.to_string(),
        body,
    };
    serde_json::to_string_pretty(&env).expect("document bodies serialize infallibly")
}

/// Reads the `kind` field without decoding the body.
pub fn peek_kind(text: &str, origin: &str) -> Result<String, DocError> {
    let header: Header = serde_json::from_str(text).map_err(|e| DocError::Parse {
        path: origin.to_string(),
        message: e.to_string(),
    })?;
    if header.schema_version != SCHEMA_VERSION {
        return Err(DocError::Version {
            path: origin.to_string(),
            found: header.schema_version,
        });
    }
    Ok(header.kind)
}

pub fn from_str<T: DeserializeOwned>(kind: &str, text: &str, origin: &str) -> Result<T, DocError> {
    let found = peek_kind(text, origin)?;
    if found != kind {
        return Err(DocError::Kind {
            path: origin.to_string(),
            expected: kind.to_string(),
            found,
        });
    }
    let env: Envelope<T> = serde_json::from_str(text).map_err(|e| DocError::Parse {
        path: origin.to_string(),
        message: e.to_string(),
    })?;
    Ok(env.body)
}

pub fn write<T: Serialize>(path: &Path, kind: &str, body: &T) -> Result<(), DocError> {
    let mut text = to_string(kind, body);
    text.push('\n');
    std::fs::write(path, text).map_err(|source| DocError::Io {
        path: path.display().to_string(),
        source,
    })
}

pub fn read_text(path: &Path) -> Result<String, DocError> {
    std::fs::read_to_string(path).map_err(|source| DocError::Io {
        path: path.display().to_string(),
        source,
    })
}

pub fn read<T: DeserializeOwned>(path: &Path, kind: &str) -> Result<T, DocError> {
    from_str(kind, &read_text(path)?, &path.display().to_string())
}
