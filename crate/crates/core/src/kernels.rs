//! Blur kernel synthesis.
//!
//! All kernels are sampled pointwise at integer offsets from the center of
//! an odd `size x size` support and normalized to unit sum. No truncation
//! threshold is applied.

use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_KERNEL_SIZE: usize = 21;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelType {
    IsotropicGaussian,
    AnisotropicGaussian,
    GeneralizedGaussian,
    Plateau,
    /// Caller-supplied weights.
    Custom,
}

impl KernelType {
    pub fn as_str(self) -> &'static str {
        match self {
            KernelType::IsotropicGaussian => "isotropic_gaussian",
            KernelType::AnisotropicGaussian => "anisotropic_gaussian",
            KernelType::GeneralizedGaussian => "generalized_gaussian",
            KernelType::Plateau => "plateau",
            KernelType::Custom => "custom",
        }
    }
}

impl FromStr for KernelType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "isotropic_gaussian" | "isotropic" | "iso" => KernelType::IsotropicGaussian,
            "anisotropic_gaussian" | "anisotropic" | "aniso" => KernelType::AnisotropicGaussian,
            "generalized_gaussian" | "generalized" => KernelType::GeneralizedGaussian,
            "plateau" => KernelType::Plateau,
            other => return Err(Error::param(format!("unknown kernel type {other:?}"))),
        })
    }
}

/// Parameters a kernel was generated from.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KernelParams {
    pub sigma_x: f64,
    pub sigma_y: f64,
    pub rotation_radians: f64,
    pub shape_beta: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BlurKernel {
    size: usize,
    weights: Vec<f64>,
    kernel_type: KernelType,
    params: KernelParams,
}

impl BlurKernel {
    /// Wraps explicit weights. They must be non-negative and sum to 1 within 1e-6.
    pub fn from_weights(size: usize, weights: Vec<f64>) -> Result<Self> {
        check_size(size)?;
        if weights.len() != size * size {
            return Err(Error::param(format!(
                "{size}x{size} kernel needs {} weights, got {}",
                size * size,
                weights.len()
            )));
        }
        if weights.iter().any(|w| !(*w >= 0.0) || !w.is_finite()) {
            return Err(Error::param("kernel weights must be finite and non-negative"));
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > 1e-6 {
            return Err(Error::param(format!("kernel weights sum to {sum}, expected 1")));
        }
        Ok(Self {
            size,
            weights,
            kernel_type: KernelType::Custom,
            params: KernelParams {
                sigma_x: 0.0,
                sigma_y: 0.0,
                rotation_radians: 0.0,
                shape_beta: 1.0,
            },
        })
    }

    /// A unit impulse, the `sigma -> 0` limit of every Gaussian family.
    pub fn delta(size: usize, sigma: f64) -> Result<Self> {
        check_size(size)?;
        let mut weights = vec![0.0; size * size];
        weights[size * size / 2] = 1.0;
        Ok(Self {
            size,
            weights,
            kernel_type: KernelType::IsotropicGaussian,
            params: KernelParams {
                sigma_x: sigma,
                sigma_y: sigma,
                rotation_radians: 0.0,
                shape_beta: 1.0,
            },
        })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn radius(&self) -> usize {
        self.size / 2
    }

    /// Row-major weights, `size * size` long.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Weight at offset `(dx, dy)` from the center.
    pub fn at(&self, dx: isize, dy: isize) -> f64 {
        let r = self.radius() as isize;
        self.weights[((dy + r) as usize) * self.size + (dx + r) as usize]
    }

    pub fn kernel_type(&self) -> KernelType {
        self.kernel_type
    }

    pub fn params(&self) -> KernelParams {
        self.params
    }

    /// Discrete second moment `sum w * (x^2 + y^2)`.
    pub fn variance(&self) -> f64 {
        let r = self.radius() as isize;
        let mut acc = 0.0;
        for dy in -r..=r {
            for dx in -r..=r {
                acc += self.at(dx, dy) * (dx * dx + dy * dy) as f64;
            }
        }
        acc
    }
}

fn check_size(size: usize) -> Result<()> {
    if size < 3 || size % 2 == 0 {
        return Err(Error::param(format!(
            "kernel size must be odd and >= 3, got {size}"
        )));
    }
    Ok(())
}

fn check_sigma(name: &str, sigma: f64) -> Result<()> {
    if !(sigma > 0.0) || !sigma.is_finite() {
        return Err(Error::param(format!("{name} must be positive, got {sigma}")));
    }
    Ok(())
}

fn check_beta(beta: f64) -> Result<()> {
    if !(beta > 0.0) || !beta.is_finite() {
        return Err(Error::param(format!("shape beta must be positive, got {beta}")));
    }
    Ok(())
}

/// Half the squared Mahalanobis radius, `0.5 * v^T S^-1 v`, with
/// `S = R(theta) diag(sx^2, sy^2) R(theta)^T`.
fn half_mahalanobis(sigma_x: f64, sigma_y: f64, theta: f64) -> impl Fn(f64, f64) -> f64 {
    let (sin, cos) = theta.sin_cos();
    let (ix, iy) = (1.0 / (sigma_x * sigma_x), 1.0 / (sigma_y * sigma_y));
    move |x, y| {
        let u = cos * x + sin * y;
        let v = -sin * x + cos * y;
        0.5 * (u * u * ix + v * v * iy)
    }
}

fn build(
    size: usize,
    kernel_type: KernelType,
    params: KernelParams,
    profile: impl Fn(f64, f64) -> f64,
) -> BlurKernel {
    let r = (size / 2) as isize;
    let mut weights = Vec::with_capacity(size * size);
    for dy in -r..=r {
        for dx in -r..=r {
            weights.push(profile(dx as f64, dy as f64));
        }
    }
    let sum: f64 = weights.iter().sum();
    for w in &mut weights {
        *w /= sum;
    }
    BlurKernel {
        size,
        weights,
        kernel_type,
        params,
    }
}

pub fn make_isotropic_gaussian(sigma: f64, size: usize) -> Result<BlurKernel> {
    check_sigma("sigma", sigma)?;
    check_size(size)?;
    let denom = 2.0 * sigma * sigma;
    Ok(build(
        size,
        KernelType::IsotropicGaussian,
        KernelParams {
            sigma_x: sigma,
            sigma_y: sigma,
            rotation_radians: 0.0,
            shape_beta: 1.0,
        },
        |x, y| (-(x * x + y * y) / denom).exp(),
    ))
}

pub fn make_anisotropic_gaussian(
    sigma_x: f64,
    sigma_y: f64,
    theta: f64,
    size: usize,
) -> Result<BlurKernel> {
    check_sigma("sigma_x", sigma_x)?;
    check_sigma("sigma_y", sigma_y)?;
    check_size(size)?;
    let q = half_mahalanobis(sigma_x, sigma_y, theta);
    Ok(build(
        size,
        KernelType::AnisotropicGaussian,
        KernelParams {
            sigma_x,
            sigma_y,
            rotation_radians: theta,
            shape_beta: 1.0,
        },
        |x, y| (-q(x, y)).exp(),
    ))
}

/// `exp(-(0.5 v^T S^-1 v)^beta)`; `beta = 1` is the anisotropic Gaussian.
pub fn make_generalized_gaussian(
    sigma_x: f64,
    sigma_y: f64,
    theta: f64,
    beta: f64,
    size: usize,
) -> Result<BlurKernel> {
    check_sigma("sigma_x", sigma_x)?;
    check_sigma("sigma_y", sigma_y)?;
    check_beta(beta)?;
    check_size(size)?;
    let q = half_mahalanobis(sigma_x, sigma_y, theta);
    Ok(build(
        size,
        KernelType::GeneralizedGaussian,
        KernelParams {
            sigma_x,
            sigma_y,
            rotation_radians: theta,
            shape_beta: beta,
        },
        |x, y| (-q(x, y).powf(beta)).exp(),
    ))
}

/// `1 / (1 + (0.5 v^T S^-1 v)^beta)`.
pub fn make_plateau(
    sigma_x: f64,
    sigma_y: f64,
    theta: f64,
    beta: f64,
    size: usize,
) -> Result<BlurKernel> {
    check_sigma("sigma_x", sigma_x)?;
    check_sigma("sigma_y", sigma_y)?;
    check_beta(beta)?;
    check_size(size)?;
    let q = half_mahalanobis(sigma_x, sigma_y, theta);
    Ok(build(
        size,
        KernelType::Plateau,
        KernelParams {
            sigma_x,
            sigma_y,
            rotation_radians: theta,
            shape_beta: beta,
        },
        |x, y| 1.0 / (1.0 + q(x, y).powf(beta)),
    ))
}

/// Dispatches on `kernel_type`. Isotropic kernels use `sigma_x` only.
pub fn make_kernel(kernel_type: KernelType, params: KernelParams, size: usize) -> Result<BlurKernel> {
    let KernelParams {
        sigma_x,
        sigma_y,
        rotation_radians,
        shape_beta,
    } = params;
    match kernel_type {
        KernelType::IsotropicGaussian => make_isotropic_gaussian(sigma_x, size),
        KernelType::AnisotropicGaussian => {
            make_anisotropic_gaussian(sigma_x, sigma_y, rotation_radians, size)
        }
        KernelType::GeneralizedGaussian => {
            make_generalized_gaussian(sigma_x, sigma_y, rotation_radians, shape_beta, size)
        }
        KernelType::Plateau => make_plateau(sigma_x, sigma_y, rotation_radians, shape_beta, size),
        KernelType::Custom => Err(Error::param("custom kernels carry explicit weights")),
    }
}

/// Plain-text weight matrix: one line per row, space separated, ten
/// significant digits per value.
pub fn dump_kernel(kernel: &BlurKernel) -> String {
    let mut out = String::new();
    for row in kernel.weights.chunks(kernel.size) {
        for (i, w) in row.iter().enumerate() {
            if i > 0 {
                out.push(' ');
            }
            write!(out, "{w:.9e}").unwrap();
        }
        out.push('\n');
    }
    out
}

/// Parses the output of [`dump_kernel`] back into rows.
pub fn parse_kernel_dump(text: &str) -> Result<Vec<Vec<f64>>> {
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|line| {
            line.split_whitespace()
                .map(|tok| {
                    tok.parse::<f64>()
                        .map_err(|e| Error::param(format!("bad kernel value {tok:?}: {e}")))
                })
                .collect()
        })
        .collect()
}
