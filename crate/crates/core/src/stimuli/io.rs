//! 8-bit PNG input and output.

use super::image::{to_grayscale, GrayImage, RgbImage};
use super::mask::ObjectMask;
use super::StimuliError;
use ::image::{ImageBuffer, Luma};
use std::path::Path;

fn decode(path: &Path) -> Result<::image::DynamicImage, StimuliError> {
    ::image::open(path).map_err(|source| StimuliError::Decode {
        path: path.display().to_string(),
        source,
    })
}

/// Reads an image as normalized RGB planes.
pub fn load_rgb(path: &Path) -> Result<RgbImage, StimuliError> {
    let rgb = decode(path)?.to_rgb8();
    let (w, h) = rgb.dimensions();
    let n = (w * h) as usize;
    let (mut r, mut g, mut b) = (Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n));
    for px in rgb.pixels() {
        r.push(px[0] as f64 / 255.0);
        g.push(px[1] as f64 / 255.0);
        b.push(px[2] as f64 / 255.0);
    }
    Ok(RgbImage {
        width: w as usize,
        height: h as usize,
        r,
        g,
        b,
    })
}

/// Reads a stored grayscale frame (no channel averaging or blur).
pub fn load_gray(path: &Path) -> Result<GrayImage, StimuliError> {
    let luma = decode(path)?.to_luma8();
    let (w, h) = luma.dimensions();
    let pixels = luma.pixels().map(|p| p[0] as f64 / 255.0).collect();
    GrayImage::new(w as usize, h as usize, pixels)
}

/// Reads an image and averages its channels.
pub fn load_as_grayscale(path: &Path) -> Result<GrayImage, StimuliError> {
    to_grayscale(&load_rgb(path)?)
}

/// Reads a binary mask; pixels brighter than mid-gray are object.
pub fn load_mask(path: &Path) -> Result<ObjectMask, StimuliError> {
    let luma = decode(path)?.to_luma8();
    let (w, h) = luma.dimensions();
    ObjectMask::new(w as usize, h as usize, luma.pixels().map(|p| p[0] > 127).collect())
}

/// Quantizes to 8 bits and writes a grayscale PNG.
pub fn save_gray(img: &GrayImage, path: &Path) -> Result<(), StimuliError> {
    let data: Vec<u8> = img
        .pixels()
        .iter()
        .map(|v| (v * 255.0).round().clamp(0.0, 255.0) as u8)
        .collect();
    let buf: ImageBuffer<Luma<u8>, Vec<u8>> =
        ImageBuffer::from_raw(img.width() as u32, img.height() as u32, data)
            .expect("buffer matches dimensions");
    buf.save(path).map_err(|source| StimuliError::Decode {
        path: path.display().to_string(),
        source,
    })
}

pub fn save_mask(mask: &ObjectMask, path: &Path) -> Result<(), StimuliError> {
    let data: Vec<u8> = mask.bits().iter().map(|b| if *b { 255 } else { 0 }).collect();
    let buf: ImageBuffer<Luma<u8>, Vec<u8>> =
        ImageBuffer::from_raw(mask.width() as u32, mask.height() as u32, data)
            .expect("buffer matches dimensions");
    buf.save(path).map_err(|source| StimuliError::Decode {
        path: path.display().to_string(),
        source,
    })
}
