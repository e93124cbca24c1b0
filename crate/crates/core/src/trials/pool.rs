use crate::jsonl::{read_responses, JsonlError};
use crate::mlds::{ClassPair, TrialResponse};
use std::path::Path;

/// Concatenates responses from several files in file order then line
/// order, optionally keeping only one class pair. Duplicates are retained.
pub fn pool_responses<P: AsRef<Path>>(
    files: &[P],
    class_pair: Option<&ClassPair>,
) -> Result<Vec<TrialResponse>, JsonlError> {
    let mut out = Vec::new();
    for f in files {
        let rs = read_responses(f.as_ref())?;
        out.extend(
            rs.into_iter()
                .filter(|r| class_pair.is_none_or(|cp| &r.class_pair == cp)),
        );
    }
    Ok(out)
}
