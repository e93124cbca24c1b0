//! Directory-level workflows shared by the command line and the service.

mod fitting;
mod null;
mod sequences;
mod stimgen;

pub use fitting::{fit_by_class_pair, skewness_from_report, ClassFit, FitFailure, FitReport};
pub use null::{random_null_sets, simulate_random_responses};
pub use sequences::{load_sequence, write_sequence, SequenceDir, SEQUENCE_FILE};
pub use stimgen::{stimgen, StimgenConfig, StimgenSummary};

use crate::doc::DocError;
use crate::mlds::MldsError;
use crate::stimuli::StimuliError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Stimuli(#[from] StimuliError),
    #[error(transparent)]
    Mlds(#[from] MldsError),
    #[error(transparent)]
    Doc(#[from] DocError),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid input layout: {0}")]
    Layout(String),
}

pub(crate) fn io_err(path: &std::path::Path) -> impl FnOnce(std::io::Error) -> PipelineError + '_ {
    move |source| PipelineError::Io {
        path: path.display().to_string(),
        source,
    }
}

/// FNV-1a, used to derive per-item seeds that do not depend on iteration
/// order or platform hashing.
pub fn stable_hash(text: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in text.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fnv_reference_values() {
        assert_eq!(stable_hash(""), 0xcbf2_9ce4_8422_2325);
        assert_eq!(stable_hash("a"), 0xaf63_dc4c_8601_ec8c);
        assert_eq!(stable_hash("foobar"), 0x8594_4171_f739_67e8);
    }
}
