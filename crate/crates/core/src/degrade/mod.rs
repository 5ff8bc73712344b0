//! Base degradation stages and their compositions.

pub mod blur;
pub mod jpeg;
pub mod noise;
pub mod pipeline;
pub mod resize;

pub use blur::convolve;
pub use jpeg::jpeg_compress;
pub use noise::{add_gaussian_noise, add_noise, add_poisson_noise, ColorMode, NoiseKind, NoiseSpec};
pub use pipeline::{
    apply_gate, run_gated, run_recipe, sample_recipe, DegradationStep, GateSpec, Mode,
    PipelineConfig, Stage,
};
pub use resize::{downsample_bicubic, upsample_bicubic};
