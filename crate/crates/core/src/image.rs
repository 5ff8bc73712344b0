//! Planar floating-point raster shared by every stage.

use crate::error::{Error, Result};

/// BT.601 luma weights.
pub const LUMA_WEIGHTS: [f64; 3] = [0.299, 0.587, 0.114];

/// A 1- or 3-channel raster with samples nominally in `[0, 1]`.
///
/// Samples are stored plane by plane, each plane row-major, so sample
/// `(c, y, x)` lives at `c * width * height + y * width + x`.
#[derive(Clone, Debug, PartialEq)]
pub struct PlanarImage {
    width: usize,
    height: usize,
    channels: usize,
    samples: Vec<f64>,
}

impl PlanarImage {
    pub fn new(width: usize, height: usize, channels: usize, samples: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::Dimension(format!(
                "image must be at least 1x1, got {width}x{height}"
            )));
        }
        if channels != 1 && channels != 3 {
            return Err(Error::Dimension(format!(
                "channel count must be 1 or 3, got {channels}"
            )));
        }
        let expected = width * height * channels;
        if samples.len() != expected {
            return Err(Error::Dimension(format!(
                "expected {expected} samples for {width}x{height}x{channels}, got {}",
                samples.len()
            )));
        }
        Ok(Self {
            width,
            height,
            channels,
            samples,
        })
    }

    pub fn filled(width: usize, height: usize, channels: usize, value: f64) -> Result<Self> {
        Self::new(
            width,
            height,
            channels,
            vec![value; width * height * channels],
        )
    }

    /// Builds an image by evaluating `f(channel, y, x)` at every sample.
    pub fn from_fn(
        width: usize,
        height: usize,
        channels: usize,
        mut f: impl FnMut(usize, usize, usize) -> f64,
    ) -> Result<Self> {
        let mut samples = Vec::with_capacity(width * height * channels);
        for c in 0..channels {
            for y in 0..height {
                for x in 0..width {
                    samples.push(f(c, y, x));
                }
            }
        }
        Self::new(width, height, channels, samples)
    }

    /// Builds an image from pixel-interleaved 8-bit data (`RGBRGB...` or grey).
    pub fn from_interleaved_u8(
        width: usize,
        height: usize,
        channels: usize,
        data: &[u8],
    ) -> Result<Self> {
        if data.len() != width * height * channels {
            return Err(Error::Dimension(format!(
                "interleaved buffer has {} bytes, expected {}",
                data.len(),
                width * height * channels
            )));
        }
        Self::from_fn(width, height, channels, |c, y, x| {
            f64::from(data[(y * width + x) * channels + c]) / 255.0
        })
    }

    /// Quantizes to pixel-interleaved 8-bit data: clamp, then
    /// round-half-away-from-zero of `255 * x`.
    pub fn to_interleaved_u8(&self) -> Vec<u8> {
        let plane = self.plane_len();
        let mut out = vec![0u8; self.samples.len()];
        for c in 0..self.channels {
            for (i, &v) in self.samples[c * plane..(c + 1) * plane].iter().enumerate() {
                out[i * self.channels + c] = quantize_u8(v);
            }
        }
        out
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn channels(&self) -> usize {
        self.channels
    }

    #[inline]
    pub fn plane_len(&self) -> usize {
        self.width * self.height
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn samples_mut(&mut self) -> &mut [f64] {
        &mut self.samples
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    pub fn plane(&self, c: usize) -> &[f64] {
        let n = self.plane_len();
        &self.samples[c * n..(c + 1) * n]
    }

    pub fn plane_mut(&mut self, c: usize) -> &mut [f64] {
        let n = self.plane_len();
        &mut self.samples[c * n..(c + 1) * n]
    }

    #[inline]
    pub fn get(&self, c: usize, y: usize, x: usize) -> f64 {
        self.samples[c * self.plane_len() + y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, c: usize, y: usize, x: usize, v: f64) {
        let n = self.plane_len();
        self.samples[c * n + y * self.width + x] = v;
    }

    pub fn same_shape(&self, other: &PlanarImage) -> bool {
        self.width == other.width && self.height == other.height && self.channels == other.channels
    }

    /// Clamps every sample into `[0, 1]`. NaN maps to 0.
    pub fn clamp_in_place(&mut self) {
        for v in &mut self.samples {
            *v = clamp_unit(*v);
        }
    }

    pub fn clamped(mut self) -> Self {
        self.clamp_in_place();
        self
    }

    /// BT.601 luma plane in `[0, 1]`; the single plane itself for grey images.
    pub fn luma(&self) -> Vec<f64> {
        if self.channels == 1 {
            return self.samples.clone();
        }
        let (r, g, b) = (self.plane(0), self.plane(1), self.plane(2));
        r.iter()
            .zip(g)
            .zip(b)
            .map(|((&r, &g), &b)| LUMA_WEIGHTS[0] * r + LUMA_WEIGHTS[1] * g + LUMA_WEIGHTS[2] * b)
            .collect()
    }

    /// Copies out the `w`x`h` window whose top-left corner is `(x0, y0)`.
    pub fn crop(&self, x0: usize, y0: usize, w: usize, h: usize) -> Result<Self> {
        if w == 0 || h == 0 || x0 + w > self.width || y0 + h > self.height {
            return Err(Error::Dimension(format!(
                "crop {w}x{h}+{x0}+{y0} exceeds {}x{} image",
                self.width, self.height
            )));
        }
        Self::from_fn(w, h, self.channels, |c, y, x| self.get(c, y0 + y, x0 + x))
    }
}

#[inline]
pub fn clamp_unit(v: f64) -> f64 {
    if v.is_nan() {
        0.0
    } else {
        v.clamp(0.0, 1.0)
    }
}

#[inline]
pub fn quantize_u8(v: f64) -> u8 {
    // f64::round is half-away-from-zero
    (clamp_unit(v) * 255.0).round() as u8
}
