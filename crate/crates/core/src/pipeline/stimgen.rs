use super::sequences::{sorted_dirs, write_sequence};
use super::{io_err, stable_hash, PipelineError};
use crate::mlds::ClassPair;
use crate::stimuli::{
    generate_sequence, io as img_io, preprocess, select_partners, GrayImage, ObjectMask,
    SequenceSpec, Viewport, DEFAULT_BLUR_SIGMA, TIE_EPSILON,
};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashMap};
use std::path::{Path, PathBuf};

#[derive(Clone, Debug)]
pub struct StimgenConfig {
    /// Rendered images as `<class>/<viewport>/<instance>.png`.
    pub images: PathBuf,
    /// Binary masks under the same relative paths.
    pub masks: PathBuf,
    pub pairs_per_instance: usize,
    pub seed: u64,
    pub blur_sigma: f64,
    pub tie_epsilon: f64,
    pub out: PathBuf,
}

impl StimgenConfig {
    pub fn new(images: PathBuf, masks: PathBuf, out: PathBuf) -> Self {
        Self {
            images,
            masks,
            pairs_per_instance: 10,
            seed: 0,
            blur_sigma: DEFAULT_BLUR_SIGMA,
            tie_epsilon: TIE_EPSILON,
            out,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct StimgenSummary {
    pub n_classes: usize,
    pub n_class_pairs: usize,
    pub n_sequences: usize,
    /// Sequence ids in generation order.
    pub sequence_ids: Vec<String>,
    /// Instances with fewer candidate partners than requested, as
    /// `<class_pair>/<viewport>/<instance>`.
    pub short_instances: Vec<String>,
}

/// `class -> viewport -> instance -> image path`.
type Corpus = BTreeMap<String, BTreeMap<Viewport, BTreeMap<String, PathBuf>>>;

fn check_name(kind: &str, name: &str) -> Result<(), PipelineError> {
    if name.is_empty() || name.contains(ClassPair::SEPARATOR) || name.contains('/') {
        return Err(PipelineError::Layout(format!(
            "{kind} name {name:?} must be non-empty and contain neither '/' nor '{}'",
            ClassPair::SEPARATOR
        )));
    }
    Ok(())
}

fn scan(images: &Path) -> Result<Corpus, PipelineError> {
    let mut corpus = Corpus::new();
    for class_dir in sorted_dirs(images)? {
        let class = class_dir.file_name().unwrap_or_default().to_string_lossy().to_string();
        check_name("class", &class)?;
        let mut views = BTreeMap::new();
        for view_dir in sorted_dirs(&class_dir)? {
            let label = view_dir.file_name().unwrap_or_default().to_string_lossy().to_string();
            let view = Viewport::parse(&label).ok_or_else(|| {
                PipelineError::Layout(format!(
                    "{}: {label:?} is not a viewport label",
                    view_dir.display()
                ))
            })?;
            let mut instances = BTreeMap::new();
            for entry in std::fs::read_dir(&view_dir).map_err(io_err(&view_dir))? {
                let path = entry.map_err(io_err(&view_dir))?.path();
                if path.extension().and_then(|e| e.to_str()) != Some("png") {
                    continue;
                }
                let stem = path.file_stem().unwrap_or_default().to_string_lossy().to_string();
                check_name("instance", &stem)?;
                instances.insert(stem, path);
            }
            if !instances.is_empty() {
                views.insert(view, instances);
            }
        }
        if !views.is_empty() {
            corpus.insert(class, views);
        }
    }
    if corpus.len() < 2 {
        return Err(PipelineError::Layout(format!(
            "{}: need images for at least two classes, found {}",
            images.display(),
            corpus.len()
        )));
    }
    Ok(corpus)
}

fn load_masks(
    masks_root: &Path,
    class: &str,
    view: Viewport,
    instances: &BTreeMap<String, PathBuf>,
) -> Result<BTreeMap<String, ObjectMask>, PipelineError> {
    let mut out = BTreeMap::new();
    for name in instances.keys() {
        let path = masks_root.join(class).join(view.label()).join(format!("{name}.png"));
        out.insert(format!("{class}/{name}"), img_io::load_mask(&path)?);
    }
    Ok(out)
}

/// Generates every blended sequence for the corpus.
///
/// For each class pair `(A, B)` with `A < B` and each viewport present in
/// both classes, every instance of A is paired with the instances of B whose
/// masks overlap it most. The selection seed mixes `seed` with a hash of the
/// class pair and viewport, so adding classes does not perturb existing
/// selections.
pub fn stimgen(config: &StimgenConfig) -> Result<StimgenSummary, PipelineError> {
    let corpus = scan(&config.images)?;
    std::fs::create_dir_all(&config.out).map_err(io_err(&config.out))?;
    let mut summary = StimgenSummary {
        n_classes: corpus.len(),
        ..Default::default()
    };
    let mut cache: HashMap<PathBuf, GrayImage> = HashMap::new();
    let mut prepared = |path: &Path| -> Result<GrayImage, PipelineError> {
        if let Some(img) = cache.get(path) {
            return Ok(img.clone());
        }
        let img = preprocess(&img_io::load_rgb(path)?, config.blur_sigma)?;
        cache.insert(path.to_path_buf(), img.clone());
        Ok(img)
    };

    let classes: Vec<&String> = corpus.keys().collect();
    for (ai, class_a) in classes.iter().enumerate() {
        for class_b in &classes[ai + 1..] {
            let cp = ClassPair::new(class_a.as_str(), class_b.as_str());
            let mut any = false;
            for (view, inst_a) in &corpus[*class_a] {
                let Some(inst_b) = corpus[*class_b].get(view) else {
                    continue;
                };
                let masks_a = load_masks(&config.masks, class_a, *view, inst_a)?;
                let masks_b = load_masks(&config.masks, class_b, *view, inst_b)?;
                let seed = config.seed ^ stable_hash(&format!("{}/{}", cp.label(), view.label()));
                let selection = select_partners(
                    &masks_a,
                    &masks_b,
                    config.pairs_per_instance,
                    config.tie_epsilon,
                    seed,
                )?;
                for short in &selection.short_instances {
                    summary
                        .short_instances
                        .push(format!("{}/{}/{}", cp.label(), view.label(), short));
                }
                for pair in &selection.pairs {
                    let a = pair.a.split_once('/').expect("class-qualified id").1;
                    let b = pair.b.split_once('/').expect("class-qualified id").1;
                    let img_a = prepared(&inst_a[a])?;
                    let img_b = prepared(&inst_b[b])?;
                    let spec = SequenceSpec::new(cp.clone(), a, b, *view);
                    let seq = generate_sequence(&img_a, &img_b, spec)?;
                    write_sequence(&config.out, &seq)?;
                    summary.sequence_ids.push(seq.sequence_id());
                    any = true;
                }
            }
            if any {
                summary.n_class_pairs += 1;
            }
        }
    }
    summary.n_sequences = summary.sequence_ids.len();
    tracing::info!(
        sequences = summary.n_sequences,
        class_pairs = summary.n_class_pairs,
        "stimulus generation finished"
    );
    Ok(summary)
}
