//! Separable bicubic resampling (Keys cubic, `a = -0.5`).
//!
//! Output pixel `i` is centered at input coordinate `(i + 0.5) * s - 0.5`
//! when shrinking by `s` and `(i + 0.5) / s - 0.5` when enlarging. When
//! shrinking, the cubic is stretched by `s` so it also acts as the
//! anti-aliasing filter. Taps falling outside the image are mirrored with
//! half-sample symmetry (`ba|abcd|dc`), and each output's weights are
//! normalized to unit sum.

use crate::error::{Error, Result};
use crate::image::{clamp_unit, PlanarImage};

pub const KEYS_A: f64 = -0.5;

/// Keys cubic convolution kernel with `a = -0.5`.
#[inline]
pub fn keys_cubic(x: f64) -> f64 {
    let a = KEYS_A;
    let t = x.abs();
    if t <= 1.0 {
        ((a + 2.0) * t - (a + 3.0)) * t * t + 1.0
    } else if t < 2.0 {
        ((a * t - 5.0 * a) * t + 8.0 * a) * t - 4.0 * a
    } else {
        0.0
    }
}

/// Half-sample symmetric index (`ba|abcd|dc`).
#[inline]
pub fn reflect_symmetric(i: isize, n: usize) -> usize {
    let period = 2 * n as isize;
    let m = i.rem_euclid(period);
    if m >= n as isize {
        (period - 1 - m) as usize
    } else {
        m as usize
    }
}

/// Per-output tap lists for one axis.
#[derive(Clone, Debug)]
pub struct AxisTaps {
    taps: Vec<Vec<(usize, f64)>>,
}

impl AxisTaps {
    /// Taps mapping `in_len` samples onto `out_len` at the given ratio
    /// (`ratio > 1` shrinks).
    pub fn new(in_len: usize, out_len: usize, ratio: f64) -> Self {
        let stretch = ratio.max(1.0);
        let support = 2.0 * stretch;
        let taps = (0..out_len)
            .map(|i| {
                let center = (i as f64 + 0.5) * ratio - 0.5;
                let lo = (center - support).ceil() as isize;
                let hi = (center + support).floor() as isize;
                let mut row: Vec<(usize, f64)> = (lo..=hi)
                    .map(|j| {
                        (
                            reflect_symmetric(j, in_len),
                            keys_cubic((j as f64 - center) / stretch),
                        )
                    })
                    .collect();
                let sum: f64 = row.iter().map(|&(_, w)| w).sum();
                for (_, w) in &mut row {
                    *w /= sum;
                }
                row
            })
            .collect();
        Self { taps }
    }

    pub fn out_len(&self) -> usize {
        self.taps.len()
    }

    pub fn taps(&self, i: usize) -> &[(usize, f64)] {
        &self.taps[i]
    }
}

fn resample(image: &PlanarImage, cols: &AxisTaps, rows: &AxisTaps) -> Result<PlanarImage> {
    let (w, h) = (image.width(), image.height());
    let (ow, oh) = (cols.out_len(), rows.out_len());
    let mut out = vec![0.0; ow * oh * image.channels()];
    let mut tmp = vec![0.0; ow * h];
    for c in 0..image.channels() {
        let src = image.plane(c);
        for y in 0..h {
            let line = &src[y * w..(y + 1) * w];
            for x in 0..ow {
                tmp[y * ow + x] = cols.taps(x).iter().map(|&(j, wt)| wt * line[j]).sum();
            }
        }
        let dst = &mut out[c * ow * oh..(c + 1) * ow * oh];
        for y in 0..oh {
            let taps = rows.taps(y);
            for x in 0..ow {
                let acc: f64 = taps.iter().map(|&(j, wt)| wt * tmp[j * ow + x]).sum();
                dst[y * ow + x] = clamp_unit(acc);
            }
        }
    }
    PlanarImage::new(ow, oh, image.channels(), out)
}

/// Anti-aliased bicubic downsampling to `floor(dim / scale)`.
pub fn downsample_bicubic(image: &PlanarImage, scale: usize) -> Result<PlanarImage> {
    if scale < 1 {
        return Err(Error::param("scale must be >= 1"));
    }
    let (ow, oh) = (image.width() / scale, image.height() / scale);
    if ow == 0 || oh == 0 {
        return Err(Error::Dimension(format!(
            "{}x{} image is smaller than scale {scale}",
            image.width(),
            image.height()
        )));
    }
    let s = scale as f64;
    resample(
        image,
        &AxisTaps::new(image.width(), ow, s),
        &AxisTaps::new(image.height(), oh, s),
    )
}

/// Plain bicubic enlargement to `dim * scale` (no anti-aliasing).
pub fn upsample_bicubic(image: &PlanarImage, scale: usize) -> Result<PlanarImage> {
    if scale < 1 {
        return Err(Error::param("scale must be >= 1"));
    }
    let (ow, oh) = (image.width() * scale, image.height() * scale);
    let r = 1.0 / scale as f64;
    resample(
        image,
        &AxisTaps::new(image.width(), ow, r),
        &AxisTaps::new(image.height(), oh, r),
    )
}
