//! Stimulus generation: grayscale conversion, blur, alpha blending and the
//! mask-overlap pair selection that decides which instances get blended.
//!
//! Preprocessing order is fixed: grayscale, then Gaussian blur, then blend.

mod blur;
mod image;
pub mod io;
mod mask;
mod select;
mod sequence;

pub use self::image::{alpha_blend, to_grayscale, GrayImage, RgbImage};
pub use blur::{gaussian_blur, gaussian_kernel, DEFAULT_BLUR_SIGMA};
pub use mask::{jaccard, ObjectMask};
pub use select::{select_pairs, select_partners, InstancePair, PairSelection, TIE_EPSILON};
pub use sequence::{
    generate_sequence, nominal_scale, preprocess, InstanceSequence, SequenceSpec, Viewport,
};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum StimuliError {
    #[error("malformed image: {0}")]
    MalformedImage(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("Jaccard index undefined: both masks are empty ({0})")]
    UndefinedJaccard(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Decode {
        path: String,
        #[source]
        source: ::image::ImageError,
    },
}
