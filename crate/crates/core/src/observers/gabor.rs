use super::{Embedding, ObserverError};
use crate::stimuli::GrayImage;
use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::sync::Arc;

/// Parameters of the untrained Gabor-energy observer.
///
/// Each (wavelength, orientation) channel filters with one kernel per phase
/// offset, combines the phase responses into a per-pixel energy magnitude
/// and average-pools it onto `pool_grid` (rows, cols).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GaborBankConfig {
    pub orientations: Vec<f64>,
    pub wavelengths: Vec<f64>,
    pub phase_offsets: Vec<f64>,
    /// Envelope standard deviation as a fraction of the wavelength.
    pub envelope_ratio: f64,
    pub aspect_ratio: f64,
    pub pool_grid: (usize, usize),
}

impl Default for GaborBankConfig {
    fn default() -> Self {
        Self {
            orientations: vec![0.0, PI / 4.0, PI / 2.0, 3.0 * PI / 4.0],
            wavelengths: vec![4.0, 8.0, 16.0],
            phase_offsets: vec![0.0, PI / 2.0],
            envelope_ratio: 0.56,
            aspect_ratio: 0.5,
            pool_grid: (8, 8),
        }
    }
}

impl GaborBankConfig {
    pub fn validate(&self) -> Result<(), ObserverError> {
        let bad = |m: &str| Err(ObserverError::InvalidParameter(m.to_string()));
        if self.orientations.is_empty() || self.wavelengths.is_empty() || self.phase_offsets.is_empty() {
            return bad("orientations, wavelengths and phase offsets must be non-empty");
        }
        if self.orientations.iter().chain(&self.phase_offsets).any(|v| !v.is_finite()) {
            return bad("orientations and phase offsets must be finite");
        }
        if self.wavelengths.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
            return bad("wavelengths must be positive");
        }
        if !(self.envelope_ratio.is_finite() && self.envelope_ratio > 0.0) {
            return bad("envelope_ratio must be positive");
        }
        if !(self.aspect_ratio.is_finite() && self.aspect_ratio > 0.0) {
            return bad("aspect_ratio must be positive");
        }
        if self.pool_grid.0 == 0 || self.pool_grid.1 == 0 {
            return bad("pool_grid must be at least 1x1");
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.wavelengths.len() * self.orientations.len() * self.pool_grid.0 * self.pool_grid.1
    }

    fn radius(&self, wavelength: f64) -> usize {
        let sigma = self.envelope_ratio * wavelength;
        (3.0 * sigma.max(sigma / self.aspect_ratio)).ceil() as usize
    }

    /// Side length of the largest kernel in the bank.
    pub fn max_kernel_size(&self) -> usize {
        self.wavelengths
            .iter()
            .map(|w| 2 * self.radius(*w) + 1)
            .max()
            .unwrap_or(1)
    }
}

/// Zero-mean Gabor kernel, `(2r+1)^2` values row-major.
fn kernel(config: &GaborBankConfig, wavelength: f64, theta: f64, phase: f64) -> (usize, Vec<f64>) {
    let r = config.radius(wavelength);
    let sigma = config.envelope_ratio * wavelength;
    let gamma2 = config.aspect_ratio * config.aspect_ratio;
    let (s, c) = theta.sin_cos();
    let side = 2 * r + 1;
    let mut env = Vec::with_capacity(side * side);
    let mut k = Vec::with_capacity(side * side);
    for dy in 0..side {
        let y = dy as f64 - r as f64;
        for dx in 0..side {
            let x = dx as f64 - r as f64;
            let xr = x * c + y * s;
            let yr = -x * s + y * c;
            let e = (-(xr * xr + gamma2 * yr * yr) / (2.0 * sigma * sigma)).exp();
            env.push(e);
            k.push(e * (2.0 * PI * xr / wavelength + phase).cos());
        }
    }
    // Remove the DC component in proportion to the envelope so that the
    // kernel sums to zero without introducing a hard-edged offset.
    let dc = k.iter().sum::<f64>() / env.iter().sum::<f64>();
    for (kv, ev) in k.iter_mut().zip(&env) {
        *kv -= dc * ev;
    }
    (r, k)
}

struct Plan2d {
    width: usize,
    height: usize,
    row_fwd: Arc<dyn Fft<f64>>,
    col_fwd: Arc<dyn Fft<f64>>,
    row_inv: Arc<dyn Fft<f64>>,
    col_inv: Arc<dyn Fft<f64>>,
}

impl Plan2d {
    fn new(width: usize, height: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            width,
            height,
            row_fwd: planner.plan_fft_forward(width),
            col_fwd: planner.plan_fft_forward(height),
            row_inv: planner.plan_fft_inverse(width),
            col_inv: planner.plan_fft_inverse(height),
        }
    }

    fn run(&self, buf: &mut [Complex64], inverse: bool) {
        let (row, col) = if inverse {
            (&self.row_inv, &self.col_inv)
        } else {
            (&self.row_fwd, &self.col_fwd)
        };
        row.process(buf);
        let mut column = vec![Complex64::new(0.0, 0.0); self.height];
        for x in 0..self.width {
            for (y, c) in column.iter_mut().enumerate() {
                *c = buf[y * self.width + x];
            }
            col.process(&mut column);
            for (y, c) in column.iter().enumerate() {
                buf[y * self.width + x] = *c;
            }
        }
    }
}

struct Channel {
    /// Spectra of phase kernels packed two per complex buffer.
    spectra: Vec<Vec<Complex64>>,
}

/// Gabor bank prepared for one image size. Kernel spectra are computed
/// once and reused for every image of that size.
pub struct GaborBank {
    config: GaborBankConfig,
    width: usize,
    height: usize,
    pad: usize,
    plan: Plan2d,
    channels: Vec<Channel>,
}

impl GaborBank {
    pub fn new(config: GaborBankConfig, width: usize, height: usize) -> Result<Self, ObserverError> {
        config.validate()?;
        let size = config.max_kernel_size();
        if width < size || height < size {
            return Err(ObserverError::InvalidParameter(format!(
                "{width}x{height} image is smaller than the {size}x{size} kernel"
            )));
        }
        if width < config.pool_grid.1 || height < config.pool_grid.0 {
            return Err(ObserverError::InvalidParameter(format!(
                "{width}x{height} image cannot be pooled onto {}x{} cells",
                config.pool_grid.0, config.pool_grid.1
            )));
        }
        let pad = size / 2;
        let pw = width + 2 * pad;
        let ph = height + 2 * pad;
        let plan = Plan2d::new(pw, ph);
        let mut channels = Vec::with_capacity(config.wavelengths.len() * config.orientations.len());
        for &lambda in &config.wavelengths {
            for &theta in &config.orientations {
                let mut spectra = Vec::new();
                for phases in config.phase_offsets.chunks(2) {
                    let mut buf = vec![Complex64::new(0.0, 0.0); pw * ph];
                    for (slot, &phase) in phases.iter().enumerate() {
                        let (r, k) = kernel(&config, lambda, theta, phase);
                        let side = 2 * r + 1;
                        for dy in 0..side {
                            for dx in 0..side {
                                let y = (dy + ph - r) % ph;
                                let x = (dx + pw - r) % pw;
                                let v = k[dy * side + dx];
                                if slot == 0 {
                                    buf[y * pw + x].re += v;
                                } else {
                                    buf[y * pw + x].im += v;
                                }
                            }
                        }
                    }
                    plan.run(&mut buf, false);
                    spectra.push(buf);
                }
                channels.push(Channel { spectra });
            }
        }
        Ok(Self {
            config,
            width,
            height,
            pad,
            plan,
            channels,
        })
    }

    pub fn config(&self) -> &GaborBankConfig {
        &self.config
    }

    pub fn dim(&self) -> usize {
        self.config.dim()
    }

    /// Feature vector in wavelength-major, orientation-minor, row-major
    /// pool order.
    pub fn embed(&self, image_id: &str, img: &GrayImage) -> Result<Embedding, ObserverError> {
        if img.width() != self.width || img.height() != self.height {
            return Err(ObserverError::InvalidParameter(format!(
                "bank prepared for {}x{} images, got {}x{}",
                self.width,
                self.height,
                img.width(),
                img.height()
            )));
        }
        let pw = self.width + 2 * self.pad;
        let ph = self.height + 2 * self.pad;
        let mut spectrum = Vec::with_capacity(pw * ph);
        for y in 0..ph {
            let sy = y.saturating_sub(self.pad).min(self.height - 1);
            for x in 0..pw {
                let sx = x.saturating_sub(self.pad).min(self.width - 1);
                spectrum.push(Complex64::new(img.get(sx, sy), 0.0));
            }
        }
        self.plan.run(&mut spectrum, false);

        let norm = 1.0 / (pw * ph) as f64;
        let (rows, cols) = self.config.pool_grid;
        let mut values = Vec::with_capacity(self.dim());
        let mut energy = vec![0.0; self.width * self.height];
        let mut buf = vec![Complex64::new(0.0, 0.0); pw * ph];
        for channel in &self.channels {
            energy.iter_mut().for_each(|e| *e = 0.0);
            for kspec in &channel.spectra {
                for ((b, s), k) in buf.iter_mut().zip(&spectrum).zip(kspec) {
                    *b = s * k;
                }
                self.plan.run(&mut buf, true);
                for y in 0..self.height {
                    let row = (y + self.pad) * pw + self.pad;
                    for x in 0..self.width {
                        let v = buf[row + x] * norm;
                        energy[y * self.width + x] += v.re * v.re + v.im * v.im;
                    }
                }
            }
            for r in 0..rows {
                let y0 = r * self.height / rows;
                let y1 = (r + 1) * self.height / rows;
                for c in 0..cols {
                    let x0 = c * self.width / cols;
                    let x1 = (c + 1) * self.width / cols;
                    let mut sum = 0.0;
                    for y in y0..y1 {
                        for x in x0..x1 {
                            sum += energy[y * self.width + x].sqrt();
                        }
                    }
                    values.push((sum / ((y1 - y0) * (x1 - x0)) as f64) as f32);
                }
            }
        }
        Embedding::new(image_id, values)
    }
}

/// One-off feature extraction. Prefer a reused [`GaborBank`] when embedding
/// many images of the same size.
pub fn gabor_features(img: &GrayImage, config: &GaborBankConfig) -> Result<Embedding, ObserverError> {
    GaborBank::new(config.clone(), img.width(), img.height())?.embed("", img)
}
