use super::image::GrayImage;
use super::StimuliError;

/// Blur applied to every grayscale image before blending.
pub const DEFAULT_BLUR_SIGMA: f64 = 3.0;

/// Normalized 1-D Gaussian taps for offsets `-r..=r`, `r = ceil(3σ)`.
pub fn gaussian_kernel(sigma: f64) -> Result<Vec<f64>, StimuliError> {
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(StimuliError::InvalidParameter(format!(
            "blur sigma must be positive, got {sigma}"
        )));
    }
    let radius = (3.0 * sigma).ceil() as i64;
    let mut taps: Vec<f64> = (-radius..=radius)
        .map(|k| (-((k * k) as f64) / (2.0 * sigma * sigma)).exp())
        .collect();
    let total: f64 = taps.iter().sum();
    taps.iter_mut().for_each(|t| *t /= total);
    Ok(taps)
}

/// Separable Gaussian blur with edge replication at the borders.
pub fn gaussian_blur(img: &GrayImage, sigma: f64) -> Result<GrayImage, StimuliError> {
    let taps = gaussian_kernel(sigma)?;
    let radius = (taps.len() / 2) as isize;
    let (w, h) = (img.width(), img.height());
    let src = img.pixels();

    let clamp = |v: isize, n: usize| v.clamp(0, n as isize - 1) as usize;

    let mut horizontal = vec![0.0; w * h];
    for y in 0..h {
        let row = &src[y * w..(y + 1) * w];
        for x in 0..w {
            let mut acc = 0.0;
            for (t, weight) in taps.iter().enumerate() {
                acc += weight * row[clamp(x as isize + t as isize - radius, w)];
            }
            horizontal[y * w + x] = acc;
        }
    }

    let mut out = vec![0.0; w * h];
    for y in 0..h {
        for x in 0..w {
            let mut acc = 0.0;
            for (t, weight) in taps.iter().enumerate() {
                acc += weight * horizontal[clamp(y as isize + t as isize - radius, h) * w + x];
            }
            out[y * w + x] = acc;
        }
    }
    Ok(GrayImage::from_raw_clamped(w, h, out))
}
