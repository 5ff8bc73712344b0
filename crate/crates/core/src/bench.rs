//! Fixed-parameter benchmark cases (practical8, classical5) and their
//! generation from a high-resolution directory.

use std::path::Path;

use crate::degrade::noise::ColorMode;
use crate::degrade::pipeline::run_recipe;
use crate::error::{Error, Result};
use crate::kernels::DEFAULT_KERNEL_SIZE;
use crate::recipe::{
    write_manifest, BlurParams, FailureRecord, ManifestRecord, NoiseParams, SampledRecipe,
    SeedTrace,
};

/// One benchmark column: which stages run and at which fixed level.
#[derive(Clone, Debug, PartialEq)]
pub struct BenchCase {
    pub name: String,
    pub blur_sigma: Option<f64>,
    pub noise_sigma: Option<f64>,
    pub jpeg_quality: Option<u8>,
    pub scale: usize,
}

impl BenchCase {
    /// Name is `bic` when nothing is set, else e.g. `b2.0n20j60`.
    pub fn new(
        blur_sigma: Option<f64>,
        noise_sigma: Option<f64>,
        jpeg_quality: Option<u8>,
        scale: usize,
    ) -> Self {
        let mut name = String::new();
        if let Some(s) = blur_sigma {
            name += &format!("b{s:.1}");
        }
        if let Some(s) = noise_sigma {
            name += &format!("n{s}");
        }
        if let Some(q) = jpeg_quality {
            name += &format!("j{q}");
        }
        if name.is_empty() {
            name = "bic".into();
        }
        Self {
            name,
            blur_sigma,
            noise_sigma,
            jpeg_quality,
            scale,
        }
    }

    /// The case applied to one image. Noise fields are keyed by
    /// `case/image_key` so every case draws its own field.
    pub fn recipe(&self, master_seed: u64, image_key: &str, kernel_size: usize) -> SampledRecipe {
        SampledRecipe {
            image_key: image_key.to_string(),
            gate_outcomes: vec![
                u8::from(self.blur_sigma.is_some()),
                u8::from(self.noise_sigma.is_some()),
                u8::from(self.jpeg_quality.is_some()),
            ],
            blur: self.blur_sigma.map(|s| BlurParams::isotropic(s, kernel_size)),
            noise: self
                .noise_sigma
                .map(|s| NoiseParams::gaussian(s, ColorMode::Color)),
            jpeg: self.jpeg_quality,
            scale: self.scale,
            seed_trace: SeedTrace::new(master_seed, format!("{}/{image_key}", self.name)),
        }
    }
}

/// bic, b2.0, n20, j60, b2.0n20, b2.0j60, n20j60, b2.0n20j60.
pub fn practical8_cases(scale: usize) -> Vec<BenchCase> {
    let mut cases = Vec::with_capacity(8);
    for mask in [0u8, 1, 2, 4, 3, 5, 6, 7] {
        cases.push(BenchCase::new(
            (mask & 1 != 0).then_some(2.0),
            (mask & 2 != 0).then_some(20.0),
            (mask & 4 != 0).then_some(60),
            scale,
        ));
    }
    cases
}

/// Bicubic plus isotropic blur at 0.6, 1.2, 1.8, 2.4.
pub fn classical5_cases(scale: usize) -> Vec<BenchCase> {
    std::iter::once(BenchCase::new(None, None, None, scale))
        .chain([0.6, 1.2, 1.8, 2.4].map(|s| BenchCase::new(Some(s), None, None, scale)))
        .collect()
}

#[derive(Clone, Debug)]
pub struct BenchOptions {
    pub master_seed: u64,
    pub kernel_size: usize,
    pub workers: usize,
}

impl Default for BenchOptions {
    fn default() -> Self {
        Self {
            master_seed: 0,
            kernel_size: DEFAULT_KERNEL_SIZE,
            workers: 0,
        }
    }
}

#[derive(Clone, Debug)]
pub struct BenchReport {
    pub records: Vec<ManifestRecord>,
    pub written: usize,
    pub failures: usize,
}

/// Writes `out_dir/<case>/<stem>.png` for every case and HR image, plus
/// `out_dir/manifest.jsonl` ordered by case, then image key.
pub fn generate_benchmark(
    hr_dir: &Path,
    out_dir: &Path,
    cases: &[BenchCase],
    opts: &BenchOptions,
) -> Result<BenchReport> {
    let images = crate::io::discover_images(hr_dir)?;
    if images.is_empty() {
        return Err(Error::EmptyDataset(hr_dir.to_path_buf()));
    }
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;

    let per_image: Vec<Vec<ManifestRecord>> =
        crate::batch::run_ordered(&images, opts.workers, |(key, path)| {
            let failure = |case: &BenchCase, error: String| {
                ManifestRecord::Failure(FailureRecord {
                    image_key: key.clone(),
                    case: Some(case.name.clone()),
                    error,
                })
            };
            let hr = match crate::io::load_image(path) {
                Ok(img) => img,
                Err(e) => {
                    let msg = e.to_string();
                    return cases.iter().map(|c| failure(c, msg.clone())).collect();
                }
            };
            cases
                .iter()
                .map(|case| {
                    let recipe = case.recipe(opts.master_seed, key, opts.kernel_size);
                    let dest = out_dir.join(&case.name).join(crate::io::png_rel_path(key));
                    match run_recipe(&hr, &recipe).and_then(|lr| crate::io::save_png(&dest, &lr)) {
                        Ok(()) => ManifestRecord::Recipe(recipe),
                        Err(e) => failure(case, e.to_string()),
                    }
                })
                .collect()
        });

    let mut records = Vec::with_capacity(images.len() * cases.len());
    for c in 0..cases.len() {
        records.extend(per_image.iter().map(|recs| recs[c].clone()));
    }
    write_manifest(&out_dir.join("manifest.jsonl"), &records)?;
    let failures = records
        .iter()
        .filter(|r| matches!(r, ManifestRecord::Failure(_)))
        .count();
    Ok(BenchReport {
        written: records.len() - failures,
        failures,
        records,
    })
}
