//! Fully resolved per-image degradations and their JSON-lines manifest.

use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::degrade::noise::{ColorMode, NoiseKind, NoiseSpec};
use crate::error::{Error, Result};
use crate::kernels::{KernelParams, KernelType};
use crate::rng::{derive_stream, StageRng, StageSlot, StreamKey};

/// Number of gated stages (blur, noise, jpeg). Downsampling is never gated.
pub const GATED_STAGES: usize = 3;

/// Seed and stable image identifier every stage stream is derived from.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SeedTrace {
    pub master_seed: u64,
    pub image_key: String,
}

impl SeedTrace {
    pub fn new(master_seed: u64, image_key: impl Into<String>) -> Self {
        Self {
            master_seed,
            image_key: image_key.into(),
        }
    }

    pub fn stream_key(&self, slot: StageSlot) -> StreamKey {
        StreamKey::new(self.master_seed, self.image_key.clone(), slot.index())
    }

    pub fn stream(&self, slot: StageSlot) -> StageRng {
        derive_stream(&self.stream_key(slot))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlurParams {
    pub kernel_type: KernelType,
    pub sigma_x: f64,
    pub sigma_y: f64,
    pub rotation_radians: f64,
    pub shape_beta: f64,
    pub size: usize,
}

impl BlurParams {
    pub fn isotropic(sigma: f64, size: usize) -> Self {
        Self {
            kernel_type: KernelType::IsotropicGaussian,
            sigma_x: sigma,
            sigma_y: sigma,
            rotation_radians: 0.0,
            shape_beta: 1.0,
            size,
        }
    }

    pub fn kernel_params(&self) -> KernelParams {
        KernelParams {
            sigma_x: self.sigma_x,
            sigma_y: self.sigma_y,
            rotation_radians: self.rotation_radians,
            shape_beta: self.shape_beta,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseParams {
    pub noise_type: NoiseKind,
    pub sigma_255: Option<f64>,
    pub poisson_lambda: Option<f64>,
    pub color_mode: ColorMode,
}

impl NoiseParams {
    pub fn gaussian(sigma_255: f64, color_mode: ColorMode) -> Self {
        Self {
            noise_type: NoiseKind::Gaussian,
            sigma_255: Some(sigma_255),
            poisson_lambda: None,
            color_mode,
        }
    }

    pub fn poisson(lambda: f64, color_mode: ColorMode) -> Self {
        Self {
            noise_type: NoiseKind::Poisson,
            sigma_255: None,
            poisson_lambda: Some(lambda),
            color_mode,
        }
    }

    pub fn spec(&self) -> Result<NoiseSpec> {
        let spec = match (self.noise_type, self.sigma_255, self.poisson_lambda) {
            (NoiseKind::Gaussian, Some(s), None) => NoiseSpec::gaussian(s, self.color_mode),
            (NoiseKind::Poisson, None, Some(l)) => NoiseSpec::poisson(l, self.color_mode),
            _ => {
                return Err(Error::param(
                    "noise block must carry exactly the level matching its type",
                ))
            }
        };
        spec.validate()?;
        Ok(spec)
    }
}

/// The concrete degradation applied to one image.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampledRecipe {
    pub image_key: String,
    /// Gate bits for blur, noise and jpeg, in pipeline order.
    pub gate_outcomes: Vec<u8>,
    pub blur: Option<BlurParams>,
    pub noise: Option<NoiseParams>,
    /// JPEG quality.
    pub jpeg: Option<u8>,
    pub scale: usize,
    pub seed_trace: SeedTrace,
}

impl SampledRecipe {
    pub fn gates(&self) -> [bool; GATED_STAGES] {
        let mut g = [false; GATED_STAGES];
        for (slot, &bit) in g.iter_mut().zip(&self.gate_outcomes) {
            *slot = bit == 1;
        }
        g
    }

    /// Checks that a parameter block is present exactly when its gate is open.
    pub fn validate(&self) -> Result<()> {
        if self.gate_outcomes.len() != GATED_STAGES || self.gate_outcomes.iter().any(|&b| b > 1) {
            return Err(Error::param(format!(
                "gate_outcomes must be {GATED_STAGES} bits, got {:?}",
                self.gate_outcomes
            )));
        }
        if self.scale < 1 {
            return Err(Error::param("scale must be >= 1"));
        }
        let [b, n, j] = self.gates();
        let present = [self.blur.is_some(), self.noise.is_some(), self.jpeg.is_some()];
        for ((name, gate), has) in ["blur", "noise", "jpeg"].iter().zip([b, n, j]).zip(present) {
            if gate != has {
                return Err(Error::param(format!(
                    "{name} block presence ({has}) disagrees with its gate ({gate})"
                )));
            }
        }
        if let Some(noise) = &self.noise {
            noise.spec()?;
        }
        if let Some(q) = self.jpeg {
            if !(1..=100).contains(&q) {
                return Err(Error::param(format!("jpeg quality {q} outside 1..=100")));
            }
        }
        Ok(())
    }
}

/// A manifest entry for a file that could not be processed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FailureRecord {
    pub image_key: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub case: Option<String>,
    pub error: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ManifestRecord {
    Recipe(SampledRecipe),
    Failure(FailureRecord),
}

pub fn write_manifest(path: &Path, records: &[ManifestRecord]) -> Result<()> {
    let mut out = Vec::new();
    for r in records {
        serde_json::to_writer(&mut out, r)?;
        out.push(b'\n');
    }
    let mut file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    file.write_all(&out).map_err(|e| Error::io(path, e))
}

pub fn read_manifest(path: &Path) -> Result<Vec<ManifestRecord>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut records = Vec::new();
    for line in BufReader::new(file).lines() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        records.push(serde_json::from_str(&line)?);
    }
    Ok(records)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sample() -> SampledRecipe {
        SampledRecipe {
            image_key: "set/a.png".into(),
            gate_outcomes: vec![1, 0, 1],
            blur: Some(BlurParams::isotropic(1.234_567_890_123, 21)),
            noise: None,
            jpeg: Some(57),
            scale: 4,
            seed_trace: SeedTrace::new(9, "set/a.png"),
        }
    }

    #[test]
    fn field_names() {
        let v: serde_json::Value = serde_json::to_value(sample()).unwrap();
        let keys: Vec<&str> = v.as_object().unwrap().keys().map(String::as_str).collect();
        for k in ["image_key", "gate_outcomes", "blur", "noise", "jpeg", "scale", "seed_trace"] {
            assert!(keys.contains(&k), "{k}");
        }
        assert_eq!(v["blur"]["kernel_type"], "isotropic_gaussian");
    }

    #[test]
    fn validation_catches_gate_mismatch() {
        assert!(sample().validate().is_ok());
        let mut r = sample();
        r.noise = Some(NoiseParams::gaussian(5.0, ColorMode::Color));
        assert!(r.validate().is_err());
        let mut r = sample();
        r.gate_outcomes = vec![1, 0];
        assert!(r.validate().is_err());
        let mut r = sample();
        r.jpeg = Some(0);
        assert!(r.validate().is_err());
    }

    #[test]
    fn failure_records_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.jsonl");
        let records = vec![
            ManifestRecord::Recipe(sample()),
            ManifestRecord::Failure(FailureRecord {
                image_key: "bad.png".into(),
                case: Some("bic".into()),
                error: "truncated".into(),
            }),
        ];
        write_manifest(&path, &records).unwrap();
        assert_eq!(read_manifest(&path).unwrap(), records);
    }

    proptest! {
        #[test]
        fn json_preserves_parameters_exactly(sigma in 0.1f64..3.0, theta in 0.0f64..3.2, lambda in 1.0f64..1e5) {
            let mut r = sample();
            r.blur.as_mut().unwrap().sigma_y = sigma;
            r.blur.as_mut().unwrap().rotation_radians = theta;
            r.gate_outcomes = vec![1, 1, 1];
            r.noise = Some(NoiseParams::poisson(lambda, ColorMode::Grey));
            let line = serde_json::to_string(&r).unwrap();
            let back: SampledRecipe = serde_json::from_str(&line).unwrap();
            prop_assert_eq!(back, r);
        }
    }
}
