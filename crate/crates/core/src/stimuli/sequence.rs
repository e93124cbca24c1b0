use super::blur::gaussian_blur;
use super::image::{alpha_blend, to_grayscale, GrayImage, RgbImage};
use super::StimuliError;
use crate::mlds::{ClassPair, SEQUENCE_LEN};
use serde::{Deserialize, Serialize};
use std::fmt;

/// The nominal blend fractions `0, 1/6, ..., 1`.
pub fn nominal_scale() -> [f64; SEQUENCE_LEN] {
    std::array::from_fn(|t| t as f64 / (SEQUENCE_LEN - 1) as f64)
}

/// The six canonical viewpoints: one per axis and direction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Viewport {
    XPos,
    XNeg,
    YPos,
    YNeg,
    ZPos,
    ZNeg,
}

impl Viewport {
    pub const ALL: [Viewport; 6] = [
        Viewport::XPos,
        Viewport::XNeg,
        Viewport::YPos,
        Viewport::YNeg,
        Viewport::ZPos,
        Viewport::ZNeg,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Viewport::XPos => "x_pos",
            Viewport::XNeg => "x_neg",
            Viewport::YPos => "y_pos",
            Viewport::YNeg => "y_neg",
            Viewport::ZPos => "z_pos",
            Viewport::ZNeg => "z_neg",
        }
    }

    pub fn parse(label: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|v| v.label() == label)
    }
}

impl fmt::Display for Viewport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SequenceSpec {
    pub class_pair: ClassPair,
    pub instance_pair: (String, String),
    pub nominal_scale: [f64; SEQUENCE_LEN],
    pub viewport_tag: Viewport,
}

impl SequenceSpec {
    pub fn new(class_pair: ClassPair, a: impl Into<String>, b: impl Into<String>, viewport: Viewport) -> Self {
        Self {
            class_pair,
            instance_pair: (a.into(), b.into()),
            nominal_scale: nominal_scale(),
            viewport_tag: viewport,
        }
    }

    pub fn validate(&self) -> Result<(), StimuliError> {
        let phi = &self.nominal_scale;
        if phi[0] != 0.0 || phi[SEQUENCE_LEN - 1] != 1.0 || phi.windows(2).any(|w| w[1] <= w[0]) {
            return Err(StimuliError::InvalidParameter(format!(
                "nominal scale must rise strictly from 0 to 1, got {phi:?}"
            )));
        }
        Ok(())
    }

    /// Directory name of the instance pair: `a__b__<viewport>`.
    pub fn instance_label(&self) -> String {
        format!(
            "{}{sep}{}{sep}{}",
            self.instance_pair.0,
            self.instance_pair.1,
            self.viewport_tag,
            sep = ClassPair::SEPARATOR
        )
    }

    /// `<A__B>/<a__b__viewport>`, also the relative output directory.
    pub fn sequence_id(&self) -> String {
        format!("{}/{}", self.class_pair.label(), self.instance_label())
    }
}

/// Seven blended frames for one instance pair.
#[derive(Clone, Debug, PartialEq)]
pub struct InstanceSequence {
    pub spec: SequenceSpec,
    pub frames: Vec<GrayImage>,
}

impl InstanceSequence {
    pub fn sequence_id(&self) -> String {
        self.spec.sequence_id()
    }

    /// Image id of frame `t`, as used by embedding manifests.
    pub fn frame_id(&self, t: usize) -> String {
        format!("{}/frame_{t}", self.sequence_id())
    }
}

/// Grayscale followed by the Gaussian blur.
pub fn preprocess(rgb: &RgbImage, blur_sigma: f64) -> Result<GrayImage, StimuliError> {
    gaussian_blur(&to_grayscale(rgb)?, blur_sigma)
}

/// Blends preprocessed endpoints at every nominal value of `spec`.
pub fn generate_sequence(
    a_img: &GrayImage,
    b_img: &GrayImage,
    spec: SequenceSpec,
) -> Result<InstanceSequence, StimuliError> {
    spec.validate()?;
    let frames = spec
        .nominal_scale
        .iter()
        .map(|&alpha| alpha_blend(a_img, b_img, alpha))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(InstanceSequence { spec, frames })
}
