use super::{io_err, PipelineError};
use crate::doc;
use crate::mlds::SEQUENCE_LEN;
use crate::stimuli::{io as img_io, InstanceSequence, SequenceSpec};
use crate::trials::{SequenceSource, TrialsError};
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};
use std::collections::HashMap;

pub const SEQUENCE_FILE: &str = "sequence.json";

fn frame_file(t: usize) -> String {
    format!("frame_{t}.png")
}

/// Writes `frame_0.png`..`frame_6.png` and `sequence.json` under
/// `root/<sequence_id>`. Returns that directory.
pub fn write_sequence(root: &Path, seq: &InstanceSequence) -> Result<PathBuf, PipelineError> {
    let dir = root.join(seq.sequence_id());
    std::fs::create_dir_all(&dir).map_err(io_err(&dir))?;
    for (t, frame) in seq.frames.iter().enumerate() {
        img_io::save_gray(frame, &dir.join(frame_file(t)))?;
    }
    doc::write(&dir.join(SEQUENCE_FILE), "sequence", &seq.spec)?;
    Ok(dir)
}

/// Loads one sequence directory written by [`write_sequence`].
pub fn load_sequence(dir: &Path) -> Result<InstanceSequence, PipelineError> {
    let spec: SequenceSpec = doc::read(&dir.join(SEQUENCE_FILE), "sequence")?;
    spec.validate()?;
    let frames = (0..SEQUENCE_LEN)
        .map(|t| img_io::load_gray(&dir.join(frame_file(t))))
        .collect::<Result<Vec<_>, _>>()?;
    if frames.windows(2).any(|w| !w[0].same_shape(&w[1])) {
        return Err(PipelineError::Layout(format!(
            "{}: frames differ in size",
            dir.display()
        )));
    }
    Ok(InstanceSequence { spec, frames })
}

/// Stimulus directory laid out as `<A__B>/<a__b__view>/`. Sequences are
/// loaded on first use and kept.
pub struct SequenceDir {
    root: PathBuf,
    ids: Vec<String>,
    cache: Mutex<HashMap<String, Arc<InstanceSequence>>>,
}

impl SequenceDir {
    pub fn open(root: &Path) -> Result<Self, PipelineError> {
        let mut ids = Vec::new();
        for class_dir in sorted_dirs(root)? {
            for seq_dir in sorted_dirs(&class_dir)? {
                if seq_dir.join(SEQUENCE_FILE).is_file() {
                    let rel = seq_dir.strip_prefix(root).expect("child of root");
                    let id = rel
                        .components()
                        .map(|c| c.as_os_str().to_string_lossy())
                        .collect::<Vec<_>>()
                        .join("/");
                    ids.push(id);
                }
            }
        }
        Ok(Self {
            root: root.to_path_buf(),
            ids,
            cache: Mutex::new(HashMap::new()),
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    /// Sequence ids in sorted order.
    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn frame_path(&self, sequence_id: &str, t: usize) -> PathBuf {
        self.root.join(sequence_id).join(frame_file(t))
    }

    pub fn load(&self, id: &str) -> Result<Arc<InstanceSequence>, PipelineError> {
        if let Some(s) = self.cache.lock().expect("sequence cache poisoned").get(id) {
            return Ok(s.clone());
        }
        if !self.ids.iter().any(|known| known == id) {
            return Err(PipelineError::Layout(format!("unknown sequence {id}")));
        }
        let seq = Arc::new(load_sequence(&self.root.join(id))?);
        if seq.sequence_id() != id {
            return Err(PipelineError::Layout(format!(
                "directory {id} holds sequence {}",
                seq.sequence_id()
            )));
        }
        self.cache
            .lock()
            .expect("sequence cache poisoned")
            .insert(id.to_string(), seq.clone());
        Ok(seq)
    }
}

impl SequenceSource for SequenceDir {
    fn sequence(&self, id: &str) -> Result<Arc<InstanceSequence>, TrialsError> {
        if !self.ids.iter().any(|known| known == id) {
            return Err(TrialsError::MissingSequence(id.to_string()));
        }
        self.load(id).map_err(|e| TrialsError::Load {
            id: id.to_string(),
            message: e.to_string(),
        })
    }
}

pub(crate) fn sorted_dirs(dir: &Path) -> Result<Vec<PathBuf>, PipelineError> {
    let mut out = Vec::new();
    for entry in std::fs::read_dir(dir).map_err(io_err(dir))? {
        let entry = entry.map_err(io_err(dir))?;
        let path = entry.path();
        if path.is_dir() {
            out.push(path);
        }
    }
    out.sort();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mlds::ClassPair;
    use crate::stimuli::{generate_sequence, GrayImage, Viewport};

    fn seq() -> InstanceSequence {
        let a = GrayImage::from_fn(8, 6, |x, y| ((x + y) % 5) as f64 / 4.0).unwrap();
        let b = GrayImage::filled(8, 6, 0.2).unwrap();
        let spec = SequenceSpec::new(ClassPair::new("cat", "dog"), "c1", "d2", Viewport::ZNeg);
        generate_sequence(&a, &b, spec).unwrap()
    }

    #[test]
    fn write_then_read_back() {
        let dir = tempfile::tempdir().unwrap();
        let s = seq();
        write_sequence(dir.path(), &s).unwrap();
        let sd = SequenceDir::open(dir.path()).unwrap();
        assert_eq!(sd.ids(), &["cat__dog/c1__d2__z_neg".to_string()]);
        let back = sd.sequence(&sd.ids()[0]).unwrap();
        assert_eq!(back.spec, s.spec);
        for (x, y) in back.frames.iter().zip(&s.frames) {
            for (p, q) in x.pixels().iter().zip(y.pixels()) {
                assert!((p - q).abs() <= 0.5 / 255.0 + 1e-12);
            }
        }
        assert!(matches!(sd.sequence("nope"), Err(TrialsError::MissingSequence(_))));
    }

    #[test]
    fn missing_frame_is_a_load_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = write_sequence(dir.path(), &seq()).unwrap();
        std::fs::remove_file(path.join("frame_3.png")).unwrap();
        let sd = SequenceDir::open(dir.path()).unwrap();
        assert!(matches!(sd.sequence(&sd.ids()[0]), Err(TrialsError::Load { .. })));
    }
}
