//! Response files: one `TrialResponse` JSON object per line.

use crate::mlds::TrialResponse;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum JsonlError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },
}

/// Serialized form of one response, without the trailing newline.
pub fn to_line(response: &TrialResponse) -> String {
    serde_json::to_string(response).expect("responses serialize infallibly")
}

/// Parses a response stream. Blank lines are skipped; line numbers in
/// errors are 1-based.
pub fn parse_responses(reader: impl BufRead, origin: &str) -> Result<Vec<TrialResponse>, JsonlError> {
    let mut out = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line.map_err(|source| JsonlError::Io {
            path: origin.to_string(),
            source,
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let r: TrialResponse = serde_json::from_str(&line).map_err(|e| JsonlError::Parse {
            path: origin.to_string(),
            line: idx + 1,
            message: e.to_string(),
        })?;
        out.push(r);
    }
    Ok(out)
}

pub fn read_responses(path: &Path) -> Result<Vec<TrialResponse>, JsonlError> {
    let file = File::open(path).map_err(|source| JsonlError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_responses(BufReader::new(file), &path.display().to_string())
}

pub fn write_responses(path: &Path, responses: &[TrialResponse]) -> Result<(), JsonlError> {
    let mut text = String::new();
    for r in responses {
        text.push_str(&to_line(r));
        text.push('\n');
    }
    std::fs::write(path, text).map_err(|source| JsonlError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Appends one response with a single write so that concurrent readers
/// never observe a partial line from this writer. Returns the line written.
pub fn append_response(path: &Path, response: &TrialResponse) -> Result<String, JsonlError> {
    let line = to_line(response);
    let mut buf = Vec::with_capacity(line.len() + 1);
    buf.extend_from_slice(line.as_bytes());
    buf.push(b'\n');
    let io = |source| JsonlError::Io {
        path: path.display().to_string(),
        source,
    };
    let mut file = OpenOptions::new().create(true).append(true).open(path).map_err(io)?;
    file.write_all(&buf).map_err(io)?;
    file.flush().map_err(io)?;
    Ok(line)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mlds::{Choice, ClassPair, Quadruple};

    fn response(n: u64) -> TrialResponse {
        TrialResponse {
            sequence_id: "cat__dog/a__b__x_pos".into(),
            class_pair: ClassPair::new("cat", "dog"),
            quadruple: Quadruple::new(0, 2, 3, 6).unwrap(),
            choice: Choice::FirstPairMoreSimilar,
            observer_id: "random:1".into(),
            presentation_seed: 5,
            timestamp: n,
        }
    }

    #[test]
    fn write_append_read() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.jsonl");
        write_responses(&path, &[response(1), response(2)]).unwrap();
        let line = append_response(&path, &response(3)).unwrap();
        assert_eq!(line, to_line(&response(3)));
        let back = read_responses(&path).unwrap();
        assert_eq!(back, vec![response(1), response(2), response(3)]);
    }

    #[test]
    fn parse_error_carries_line_number() {
        let good = to_line(&response(1));
        let text = format!("{good}\n\n{{\"sequence_id\":1}}\n");
        match parse_responses(text.as_bytes(), "f.jsonl") {
            Err(JsonlError::Parse { line, path, .. }) => {
                assert_eq!(line, 3);
                assert_eq!(path, "f.jsonl");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rejects_invalid_quadruple() {
        let text = to_line(&response(1)).replace("[0,2,3,6]", "[3,2,1,0]");
        assert!(parse_responses(text.as_bytes(), "f").is_err());
    }
}
