use super::StimuliError;

/// Single-channel image with row-major intensities in `[0, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    pixels: Vec<f64>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, pixels: Vec<f64>) -> Result<Self, StimuliError> {
        if width == 0 || height == 0 || width * height != pixels.len() {
            return Err(StimuliError::MalformedImage(format!(
                "{width}x{height} image with {} pixels",
                pixels.len()
            )));
        }
        if let Some(v) = pixels.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(StimuliError::MalformedImage(format!(
                "pixel value {v} outside [0, 1]"
            )));
        }
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    pub fn filled(width: usize, height: usize, value: f64) -> Result<Self, StimuliError> {
        Self::new(width, height, vec![value; width * height])
    }

    pub fn from_fn(
        width: usize,
        height: usize,
        mut f: impl FnMut(usize, usize) -> f64,
    ) -> Result<Self, StimuliError> {
        let mut pixels = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                pixels.push(f(x, y));
            }
        }
        Self::new(width, height, pixels)
    }

    pub(crate) fn from_raw_clamped(width: usize, height: usize, mut pixels: Vec<f64>) -> Self {
        debug_assert_eq!(width * height, pixels.len());
        pixels.iter_mut().for_each(|v| *v = v.clamp(0.0, 1.0));
        Self {
            width,
            height,
            pixels,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[f64] {
        &self.pixels
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.pixels[y * self.width + x]
    }

    pub fn same_shape(&self, other: &GrayImage) -> bool {
        self.width == other.width && self.height == other.height
    }
}

/// Three-plane color image, each channel row-major in `[0, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct RgbImage {
    pub width: usize,
    pub height: usize,
    pub r: Vec<f64>,
    pub g: Vec<f64>,
    pub b: Vec<f64>,
}

/// Channel average `(R + G + B) / 3`.
pub fn to_grayscale(rgb: &RgbImage) -> Result<GrayImage, StimuliError> {
    let n = rgb.width * rgb.height;
    if rgb.r.len() != n || rgb.g.len() != n || rgb.b.len() != n {
        return Err(StimuliError::MalformedImage(format!(
            "channel lengths {}/{}/{} for a {}x{} image",
            rgb.r.len(),
            rgb.g.len(),
            rgb.b.len(),
            rgb.width,
            rgb.height
        )));
    }
    let pixels = rgb
        .r
        .iter()
        .zip(&rgb.g)
        .zip(&rgb.b)
        .map(|((r, g), b)| (r + g + b) / 3.0)
        .collect();
    GrayImage::new(rgb.width, rgb.height, pixels)
}

/// Per-pixel `a·(1 − α) + b·α`. `α = 0` returns `a` and `α = 1` returns `b`
/// bit for bit.
pub fn alpha_blend(a: &GrayImage, b: &GrayImage, alpha: f64) -> Result<GrayImage, StimuliError> {
    if !a.same_shape(b) {
        return Err(StimuliError::MalformedImage(format!(
            "cannot blend {}x{} with {}x{}",
            a.width, a.height, b.width, b.height
        )));
    }
    if !(0.0..=1.0).contains(&alpha) {
        return Err(StimuliError::InvalidParameter(format!(
            "alpha {alpha} outside [0, 1]"
        )));
    }
    let pixels = a
        .pixels
        .iter()
        .zip(&b.pixels)
        .map(|(pa, pb)| pa * (1.0 - alpha) + pb * alpha)
        .collect();
    Ok(GrayImage::from_raw_clamped(a.width, a.height, pixels))
}
