//! Response sources for 2AFC trials.
//!
//! Machine observers compare frames through feature vectors and pick the
//! pair whose embeddings are closer in Euclidean distance. Synthetic
//! observers sample the MLDS decision model from a known scale; the random
//! observer flips a fair coin.

mod choice;
mod embedding;
mod gabor;

pub use choice::{
    machine_choice, synthetic_choice, Embedder, GaborEmbedder, ManifestEmbedder, Observer,
    ObserverKind, PresentedTrial,
};
pub use embedding::{l2_distance, load_manifest, parse_manifest, Embedding, Manifest};
pub use gabor::{gabor_features, GaborBank, GaborBankConfig};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum ObserverError {
    #[error("malformed embedding: {0}")]
    MalformedEmbedding(String),
    #[error("no embedding for image {0}")]
    MissingEmbedding(String),
    #[error("duplicate image id {id} at line {line}")]
    DuplicateId { id: String, line: usize },
    #[error("dimension mismatch at line {line}: expected {expected}, found {found}")]
    DimMismatch {
        line: usize,
        expected: usize,
        found: usize,
    },
    #[error("parse error at line {line}: {message}")]
    ParseError { line: usize, message: String },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}
