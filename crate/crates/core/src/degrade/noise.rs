use rand::Rng;
use rand_distr::{Distribution, Poisson, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::{clamp_unit, PlanarImage};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ColorMode {
    /// One field shared by all channels.
    Grey,
    /// An independent field per channel.
    Color,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseKind {
    Gaussian,
    Poisson,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum NoiseSpec {
    /// Additive white Gaussian noise, sigma on the 0-255 scale.
    Gaussian { sigma_255: f64, color_mode: ColorMode },
    /// `y = Poisson(x * lambda) / lambda`.
    Poisson { lambda: f64, color_mode: ColorMode },
}

impl NoiseSpec {
    pub fn gaussian(sigma_255: f64, color_mode: ColorMode) -> Self {
        NoiseSpec::Gaussian {
            sigma_255,
            color_mode,
        }
    }

    pub fn poisson(lambda: f64, color_mode: ColorMode) -> Self {
        NoiseSpec::Poisson { lambda, color_mode }
    }

    pub fn kind(&self) -> NoiseKind {
        match self {
            NoiseSpec::Gaussian { .. } => NoiseKind::Gaussian,
            NoiseSpec::Poisson { .. } => NoiseKind::Poisson,
        }
    }

    pub fn color_mode(&self) -> ColorMode {
        match *self {
            NoiseSpec::Gaussian { color_mode, .. } | NoiseSpec::Poisson { color_mode, .. } => {
                color_mode
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            NoiseSpec::Gaussian { sigma_255, .. } if !(sigma_255 > 0.0) || !sigma_255.is_finite() => {
                Err(Error::param(format!("gaussian sigma must be positive, got {sigma_255}")))
            }
            NoiseSpec::Poisson { lambda, .. } if !(lambda > 0.0) || !lambda.is_finite() => {
                Err(Error::param(format!("poisson lambda must be positive, got {lambda}")))
            }
            _ => Ok(()),
        }
    }
}

/// Dispatches to the Gaussian or Poisson stage.
pub fn add_noise<R: Rng + ?Sized>(image: &PlanarImage, spec: &NoiseSpec, rng: &mut R) -> Result<PlanarImage> {
    match spec.kind() {
        NoiseKind::Gaussian => add_gaussian_noise(image, spec, rng),
        NoiseKind::Poisson => add_poisson_noise(image, spec, rng),
    }
}

pub fn add_gaussian_noise<R: Rng + ?Sized>(
    image: &PlanarImage,
    spec: &NoiseSpec,
    rng: &mut R,
) -> Result<PlanarImage> {
    let NoiseSpec::Gaussian {
        sigma_255,
        color_mode,
    } = *spec
    else {
        return Err(Error::param("add_gaussian_noise needs a gaussian spec"));
    };
    spec.validate()?;
    let sigma = sigma_255 / 255.0;
    let mut out = image.clone();
    let n = image.plane_len();
    match color_mode {
        ColorMode::Grey => {
            let field: Vec<f64> = (0..n)
                .map(|_| sigma * rng.sample::<f64, _>(StandardNormal))
                .collect();
            for c in 0..out.channels() {
                for (v, e) in out.plane_mut(c).iter_mut().zip(&field) {
                    *v = clamp_unit(*v + e);
                }
            }
        }
        ColorMode::Color => {
            for v in out.samples_mut() {
                *v = clamp_unit(*v + sigma * rng.sample::<f64, _>(StandardNormal));
            }
        }
    }
    Ok(out)
}

#[inline]
fn poisson_sample<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> Result<f64> {
    if mean <= 0.0 {
        return Ok(0.0);
    }
    Poisson::new(mean)
        .map(|d| d.sample(rng))
        .map_err(|e| Error::param(format!("poisson mean {mean}: {e}")))
}

/// Photon-count noise. Grey mode draws one field on the luma plane and adds
/// its deviation to every channel.
pub fn add_poisson_noise<R: Rng + ?Sized>(
    image: &PlanarImage,
    spec: &NoiseSpec,
    rng: &mut R,
) -> Result<PlanarImage> {
    let NoiseSpec::Poisson { lambda, color_mode } = *spec else {
        return Err(Error::param("add_poisson_noise needs a poisson spec"));
    };
    spec.validate()?;
    let mut out = image.clone();
    match color_mode {
        ColorMode::Grey if image.channels() == 3 => {
            let luma = image.luma();
            let mut field = Vec::with_capacity(luma.len());
            for &y in &luma {
                let y = clamp_unit(y);
                field.push(poisson_sample(y * lambda, rng)? / lambda - y);
            }
            for c in 0..out.channels() {
                for (v, e) in out.plane_mut(c).iter_mut().zip(&field) {
                    *v = clamp_unit(*v + e);
                }
            }
        }
        _ => {
            for v in out.samples_mut() {
                *v = clamp_unit(poisson_sample(clamp_unit(*v) * lambda, rng)? / lambda);
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{derive_stream, StreamKey};

    fn rng() -> crate::rng::StageRng {
        derive_stream(&StreamKey::new(3, "noise-test", 3))
    }

    fn mean_var(v: &[f64]) -> (f64, f64) {
        let n = v.len() as f64;
        let mean = v.iter().sum::<f64>() / n;
        let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
        (mean, var)
    }

    #[test]
    fn gaussian_std_matches() {
        let img = PlanarImage::filled(1000, 1000, 1, 0.5).unwrap();
        let out = add_gaussian_noise(&img, &NoiseSpec::gaussian(20.0, ColorMode::Color), &mut rng()).unwrap();
        let (_, var) = mean_var(out.samples());
        let target = 20.0 / 255.0;
        assert!((var.sqrt() / target - 1.0).abs() < 0.02, "std {}", var.sqrt());
    }

    #[test]
    fn grey_noise_shares_one_field() {
        let img = PlanarImage::from_fn(16, 16, 3, |c, _, _| 0.3 + 0.2 * c as f64).unwrap();
        let out = add_gaussian_noise(&img, &NoiseSpec::gaussian(10.0, ColorMode::Grey), &mut rng()).unwrap();
        for i in 0..img.plane_len() {
            let d: Vec<f64> = (0..3).map(|c| out.plane(c)[i] - img.plane(c)[i]).collect();
            assert!((d[0] - d[1]).abs() < 1e-12 && (d[1] - d[2]).abs() < 1e-12);
        }
        let color = add_gaussian_noise(&img, &NoiseSpec::gaussian(10.0, ColorMode::Color), &mut rng()).unwrap();
        assert_ne!(
            color.plane(0)[0] - img.plane(0)[0],
            color.plane(1)[0] - img.plane(1)[0]
        );
    }

    #[test]
    fn vanishing_sigma_is_identity() {
        let img = PlanarImage::from_fn(8, 8, 3, |c, y, x| ((c + y + x) % 5) as f64 / 4.0).unwrap();
        let out = add_gaussian_noise(&img, &NoiseSpec::gaussian(1e-9, ColorMode::Color), &mut rng()).unwrap();
        for (a, b) in img.samples().iter().zip(out.samples()) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn wrong_spec_is_rejected() {
        let img = PlanarImage::filled(4, 4, 1, 0.5).unwrap();
        let p = NoiseSpec::poisson(10.0, ColorMode::Color);
        let g = NoiseSpec::gaussian(10.0, ColorMode::Color);
        assert!(add_gaussian_noise(&img, &p, &mut rng()).is_err());
        assert!(add_poisson_noise(&img, &g, &mut rng()).is_err());
        assert!(add_poisson_noise(&img, &NoiseSpec::poisson(0.0, ColorMode::Color), &mut rng()).is_err());
        assert!(add_gaussian_noise(&img, &NoiseSpec::gaussian(-1.0, ColorMode::Grey), &mut rng()).is_err());
    }

    #[test]
    fn poisson_keeps_black_black() {
        for mode in [ColorMode::Grey, ColorMode::Color] {
            let img = PlanarImage::filled(32, 32, 3, 0.0).unwrap();
            let out = add_poisson_noise(&img, &NoiseSpec::poisson(50.0, mode), &mut rng()).unwrap();
            assert!(out.samples().iter().all(|&v| v == 0.0));
        }
    }

    #[test]
    fn poisson_variance_matches() {
        let img = PlanarImage::filled(1000, 1000, 1, 0.5).unwrap();
        let out = add_poisson_noise(&img, &NoiseSpec::poisson(1000.0, ColorMode::Color), &mut rng()).unwrap();
        let (mean, var) = mean_var(out.samples());
        assert!((mean - 0.5).abs() < 1e-3);
        assert!((var / 5e-4 - 1.0).abs() < 0.05, "var {var}");
    }

    #[test]
    fn poisson_converges_at_high_lambda() {
        let img = PlanarImage::from_fn(64, 64, 3, |c, y, x| (c as f64 * 0.2 + (x + y) as f64 / 200.0).min(1.0)).unwrap();
        let out = add_poisson_noise(&img, &NoiseSpec::poisson(1e6, ColorMode::Color), &mut rng()).unwrap();
        for (a, b) in img.samples().iter().zip(out.samples()) {
            assert!((a - b).abs() < 1e-2);
        }
    }
}
