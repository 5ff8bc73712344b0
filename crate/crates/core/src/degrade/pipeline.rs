//! Classical, practical and gated compositions of the base stages.
//!
//! The stage order is fixed: blur, downsample, noise, jpeg. Blur, noise and
//! jpeg each sit behind a gate; a closed gate returns its input untouched.

use std::f64::consts::PI;
use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::blur::convolve;
use super::jpeg::jpeg_compress;
use super::noise::{add_noise, ColorMode, NoiseSpec};
use super::resize::downsample_bicubic;
use crate::error::{Error, Result};
use crate::image::PlanarImage;
use crate::kernels::{make_kernel, BlurKernel, KernelType, DEFAULT_KERNEL_SIZE};
use crate::recipe::{BlurParams, NoiseParams, SampledRecipe, SeedTrace};
use crate::rng::{StageRng, StageSlot};

/// Isotropic sigmas below this produce a unit impulse.
pub const MIN_BLUR_SIGMA: f64 = 0.1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Blur,
    Downsample,
    Noise,
    Jpeg,
}

pub const STAGE_ORDER: [Stage; 4] = [Stage::Blur, Stage::Downsample, Stage::Noise, Stage::Jpeg];

impl Stage {
    pub fn slot(self) -> StageSlot {
        match self {
            Stage::Blur => StageSlot::Blur,
            Stage::Downsample => StageSlot::Downsample,
            Stage::Noise => StageSlot::Noise,
            Stage::Jpeg => StageSlot::Jpeg,
        }
    }
}

#[derive(Clone, Debug)]
pub enum DegradationStep {
    Blur(BlurKernel),
    Downsample { scale: usize },
    Noise(NoiseSpec),
    Jpeg { quality: u8 },
}

impl DegradationStep {
    pub fn stage(&self) -> Stage {
        match self {
            DegradationStep::Blur(_) => Stage::Blur,
            DegradationStep::Downsample { .. } => Stage::Downsample,
            DegradationStep::Noise(_) => Stage::Noise,
            DegradationStep::Jpeg { .. } => Stage::Jpeg,
        }
    }

    /// Applies the step unconditionally. Only noise consumes `rng`.
    pub fn apply(&self, image: &PlanarImage, rng: &mut StageRng) -> Result<PlanarImage> {
        match self {
            DegradationStep::Blur(k) => convolve(image, k),
            DegradationStep::Downsample { scale } => downsample_bicubic(image, *scale),
            DegradationStep::Noise(spec) => add_noise(image, spec, rng),
            DegradationStep::Jpeg { quality } => jpeg_compress(image, *quality),
        }
    }
}

/// `gate = true` applies `step`; `gate = false` returns `image` unchanged.
pub fn apply_gate(
    step: &DegradationStep,
    gate: bool,
    image: &PlanarImage,
    rng: &mut StageRng,
) -> Result<PlanarImage> {
    if gate {
        step.apply(image, rng)
    } else {
        Ok(image.clone())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// Only the blur gate is drawn; noise and jpeg stay closed.
    Classical,
    /// Every gate open.
    Practical,
    /// Every gate an independent Bernoulli draw.
    Gated,
}

/// Per-stage gate probabilities. Downsampling has no gate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GateSpec {
    pub blur: f64,
    pub noise: f64,
    pub jpeg: f64,
}

impl Default for GateSpec {
    fn default() -> Self {
        Self::uniform(0.5)
    }
}

impl GateSpec {
    pub fn uniform(p: f64) -> Self {
        Self {
            blur: p,
            noise: p,
            jpeg: p,
        }
    }

    /// `(stage, gate probability)` in pipeline order; `None` for ungated stages.
    pub fn stages(&self) -> [(Stage, Option<f64>); 4] {
        [
            (Stage::Blur, Some(self.blur)),
            (Stage::Downsample, None),
            (Stage::Noise, Some(self.noise)),
            (Stage::Jpeg, Some(self.jpeg)),
        ]
    }

    fn validate(&self) -> Result<()> {
        for (stage, p) in self.stages() {
            if let Some(p) = p {
                if !(0.0..=1.0).contains(&p) {
                    return Err(Error::Config(format!(
                        "{stage:?} gate probability {p} outside [0, 1]"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Declarative description of a degradation run. Loaded from JSON; every
/// key is optional and falls back to the light-model defaults.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub mode: Mode,
    pub scale: usize,
    pub blur_sigma: [f64; 2],
    pub noise_sigma: [f64; 2],
    pub jpeg_quality: [u8; 2],
    pub gate_probabilities: GateSpec,
    /// Draws kernel and noise families from the extended taxonomy.
    pub hard_model: bool,
    pub master_seed: u64,
    pub kernel_size: usize,
    pub generalized_beta: [f64; 2],
    pub plateau_beta: [f64; 2],
    /// Poisson photon-count scale, sampled log-uniformly.
    pub poisson_lambda: [f64; 2],
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            mode: Mode::Gated,
            scale: 4,
            blur_sigma: [0.1, 3.0],
            noise_sigma: [1.0, 30.0],
            jpeg_quality: [40, 95],
            gate_probabilities: GateSpec::default(),
            hard_model: false,
            master_seed: 0,
            kernel_size: DEFAULT_KERNEL_SIZE,
            generalized_beta: [0.5, 4.0],
            plateau_beta: [1.0, 2.0],
            poisson_lambda: [36.0, 32_512.0],
        }
    }
}

fn check_range(name: &str, r: [f64; 2], min: f64, strict: bool) -> Result<()> {
    let ok_low = if strict { r[0] > min } else { r[0] >= min };
    if !(r[0] <= r[1]) || !ok_low || !r[1].is_finite() {
        return Err(Error::Config(format!("{name} range {r:?} is invalid")));
    }
    Ok(())
}

impl PipelineConfig {
    pub fn with_mode(mode: Mode) -> Self {
        Self {
            mode,
            ..Self::default()
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self =
            serde_json::from_str(text).map_err(|e| Error::Config(format!("config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        if self.scale < 1 {
            return Err(Error::Config("scale must be >= 1".into()));
        }
        if self.kernel_size < 3 || self.kernel_size % 2 == 0 {
            return Err(Error::Config(format!(
                "kernel_size must be odd and >= 3, got {}",
                self.kernel_size
            )));
        }
        check_range("blur_sigma", self.blur_sigma, 0.0, false)?;
        check_range("noise_sigma", self.noise_sigma, 0.0, true)?;
        let [qlo, qhi] = self.jpeg_quality;
        if qlo < 1 || qhi > 100 || qlo > qhi {
            return Err(Error::Config(format!(
                "jpeg_quality range {:?} is invalid",
                self.jpeg_quality
            )));
        }
        check_range("generalized_beta", self.generalized_beta, 0.0, true)?;
        check_range("plateau_beta", self.plateau_beta, 0.0, true)?;
        check_range("poisson_lambda", self.poisson_lambda, 0.0, true)?;
        if self.hard_model && self.blur_sigma[0] <= 0.0 {
            return Err(Error::Config(
                "hard_model needs a strictly positive blur_sigma lower bound".into(),
            ));
        }
        self.gate_probabilities.validate()
    }
}

fn uniform<R: Rng>(rng: &mut R, [lo, hi]: [f64; 2]) -> f64 {
    let u: f64 = rng.random();
    lo + (hi - lo) * u
}

fn log_uniform<R: Rng>(rng: &mut R, [lo, hi]: [f64; 2]) -> f64 {
    (uniform(rng, [lo.ln(), hi.ln()])).exp().clamp(lo, hi)
}

fn sample_blur<R: Rng>(cfg: &PipelineConfig, rng: &mut R) -> BlurParams {
    if !cfg.hard_model {
        return BlurParams::isotropic(uniform(rng, cfg.blur_sigma), cfg.kernel_size);
    }
    // iso / aniso gaussian, generalized iso / aniso, plateau iso / aniso
    let family = rng.random_range(0..6u8);
    let anisotropic = family % 2 == 1;
    let sigma_x = uniform(rng, cfg.blur_sigma);
    let (sigma_y, rotation) = if anisotropic {
        (uniform(rng, cfg.blur_sigma), uniform(rng, [0.0, PI]))
    } else {
        (sigma_x, 0.0)
    };
    let (kernel_type, beta) = match family / 2 {
        0 if anisotropic => (KernelType::AnisotropicGaussian, 1.0),
        0 => (KernelType::IsotropicGaussian, 1.0),
        1 => (KernelType::GeneralizedGaussian, uniform(rng, cfg.generalized_beta)),
        _ => (KernelType::Plateau, uniform(rng, cfg.plateau_beta)),
    };
    BlurParams {
        kernel_type,
        sigma_x,
        sigma_y,
        rotation_radians: rotation,
        shape_beta: beta,
        size: cfg.kernel_size,
    }
}

fn sample_noise<R: Rng>(cfg: &PipelineConfig, rng: &mut R) -> NoiseParams {
    if !cfg.hard_model {
        return NoiseParams::gaussian(uniform(rng, cfg.noise_sigma), ColorMode::Color);
    }
    let kind = rng.random_range(0..4u8);
    let mode = if kind % 2 == 0 {
        ColorMode::Grey
    } else {
        ColorMode::Color
    };
    if kind < 2 {
        NoiseParams::gaussian(uniform(rng, cfg.noise_sigma), mode)
    } else {
        NoiseParams::poisson(log_uniform(rng, cfg.poisson_lambda), mode)
    }
}

/// Draws the gate vector and the parameters of every open stage.
pub fn sample_recipe(config: &PipelineConfig, trace: &SeedTrace) -> SampledRecipe {
    let mut rng = trace.stream(StageSlot::Sampler);
    let p = config.gate_probabilities;
    let draws: [f64; 3] = [rng.random(), rng.random(), rng.random()];
    let bernoulli = [draws[0] < p.blur, draws[1] < p.noise, draws[2] < p.jpeg];
    let gates = match config.mode {
        Mode::Classical => [bernoulli[0], false, false],
        Mode::Practical => [true, true, true],
        Mode::Gated => bernoulli,
    };
    let blur = gates[0].then(|| sample_blur(config, &mut rng));
    let noise = gates[1].then(|| sample_noise(config, &mut rng));
    let jpeg = gates[2].then(|| {
        let [lo, hi] = config.jpeg_quality;
        rng.random_range(lo..=hi)
    });
    SampledRecipe {
        image_key: trace.image_key.clone(),
        gate_outcomes: gates.iter().map(|&g| u8::from(g)).collect(),
        blur,
        noise,
        jpeg,
        scale: config.scale,
        seed_trace: trace.clone(),
    }
}

/// Kernel for a recipe's blur block; isotropic sigmas under
/// [`MIN_BLUR_SIGMA`] give a unit impulse.
pub fn blur_kernel(params: &BlurParams) -> Result<BlurKernel> {
    if params.kernel_type == KernelType::IsotropicGaussian && params.sigma_x < MIN_BLUR_SIGMA {
        if params.sigma_x < 0.0 || params.sigma_x.is_nan() {
            return Err(Error::param(format!("blur sigma {} is negative", params.sigma_x)));
        }
        return BlurKernel::delta(params.size, params.sigma_x);
    }
    make_kernel(params.kernel_type, params.kernel_params(), params.size)
}

/// The recipe as an ordered list of `(step, gate)` pairs.
pub fn recipe_steps(recipe: &SampledRecipe) -> Result<Vec<(DegradationStep, bool)>> {
    recipe.validate()?;
    let [gb, gn, gj] = recipe.gates();
    let blur = match &recipe.blur {
        Some(p) => DegradationStep::Blur(blur_kernel(p)?),
        None => DegradationStep::Blur(BlurKernel::delta(3, 0.0)?),
    };
    let noise = match &recipe.noise {
        Some(p) => DegradationStep::Noise(p.spec()?),
        None => DegradationStep::Noise(NoiseSpec::gaussian(1.0, ColorMode::Color)),
    };
    let jpeg = DegradationStep::Jpeg {
        quality: recipe.jpeg.unwrap_or(100),
    };
    Ok(vec![
        (blur, gb),
        (DegradationStep::Downsample { scale: recipe.scale }, true),
        (noise, gn),
        (jpeg, gj),
    ])
}

/// Replays `recipe` on `image`. Noise fields are regenerated from the
/// recipe's seed trace, so replays are bit-exact.
pub fn run_recipe(image: &PlanarImage, recipe: &SampledRecipe) -> Result<PlanarImage> {
    let steps = recipe_steps(recipe)?;
    if image.width() / recipe.scale == 0 || image.height() / recipe.scale == 0 {
        return Err(Error::Dimension(format!(
            "{}x{} image is smaller than scale {}",
            image.width(),
            image.height(),
            recipe.scale
        )));
    }
    let mut current = image.clone();
    for (step, gate) in &steps {
        let mut rng = recipe.seed_trace.stream(step.stage().slot());
        current = apply_gate(step, *gate, &current, &mut rng)?;
    }
    Ok(current)
}

pub fn run_gated(
    image: &PlanarImage,
    config: &PipelineConfig,
    trace: &SeedTrace,
) -> Result<(PlanarImage, SampledRecipe)> {
    let recipe = sample_recipe(config, trace);
    let out = run_recipe(image, &recipe)?;
    Ok((out, recipe))
}
