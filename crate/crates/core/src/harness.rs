//! Directory-level drivers behind the command line: training-pair
//! synthesis and the bicubic upsampling baseline.

use std::path::Path;

use rand::Rng;

use crate::degrade::pipeline::{run_recipe, sample_recipe, PipelineConfig};
use crate::degrade::resize::upsample_bicubic;
use crate::error::{Error, Result};
use crate::image::PlanarImage;
use crate::io::{discover_images, load_image, png_rel_path, save_png};
use crate::recipe::{write_manifest, FailureRecord, ManifestRecord, SeedTrace};
use crate::rng::StageSlot;

#[derive(Clone, Debug, Default)]
pub struct SynthOptions {
    pub workers: usize,
    /// Side of a square HR patch cut before degrading.
    pub crop: Option<usize>,
}

#[derive(Clone, Debug)]
pub struct RunReport {
    pub records: Vec<ManifestRecord>,
    pub failures: usize,
}

impl RunReport {
    fn new(records: Vec<ManifestRecord>) -> Self {
        let failures = records
            .iter()
            .filter(|r| matches!(r, ManifestRecord::Failure(_)))
            .count();
        Self { records, failures }
    }
}

/// Square crop whose corner comes from the image's crop stream.
pub fn random_crop(image: &PlanarImage, size: usize, trace: &SeedTrace) -> Result<PlanarImage> {
    if size > image.width() || size > image.height() {
        return Err(Error::Dimension(format!(
            "crop {size} exceeds {}x{} image",
            image.width(),
            image.height()
        )));
    }
    let mut rng = trace.stream(StageSlot::Crop);
    let x0 = rng.random_range(0..=image.width() - size);
    let y0 = rng.random_range(0..=image.height() - size);
    image.crop(x0, y0, size, size)
}

/// Degrades every image under `hr_dir` into `out_dir/lr/<stem>.png` and
/// writes `out_dir/manifest.jsonl` in image-key order. With a crop, the HR
/// patch goes to `out_dir/hr/<stem>.png`.
pub fn synthesize_dataset(
    hr_dir: &Path,
    out_dir: &Path,
    config: &PipelineConfig,
    opts: &SynthOptions,
) -> Result<RunReport> {
    config.validate()?;
    if let Some(c) = opts.crop {
        if c == 0 || c % config.scale != 0 {
            return Err(Error::Config(format!(
                "crop {c} must be a positive multiple of scale {}",
                config.scale
            )));
        }
    }
    let images = discover_images(hr_dir)?;
    if images.is_empty() {
        return Err(Error::EmptyDataset(hr_dir.to_path_buf()));
    }
    let records = crate::batch::run_ordered(&images, opts.workers, |(key, path)| {
        let trace = SeedTrace::new(config.master_seed, key.clone());
        let rel = png_rel_path(key);
        let work = || -> Result<_> {
            let mut hr = load_image(path)?;
            if let Some(c) = opts.crop {
                hr = random_crop(&hr, c, &trace)?;
            }
            let recipe = sample_recipe(config, &trace);
            let lr = run_recipe(&hr, &recipe)?;
            if opts.crop.is_some() {
                save_png(&out_dir.join("hr").join(&rel), &hr)?;
            }
            save_png(&out_dir.join("lr").join(&rel), &lr)?;
            Ok(recipe)
        };
        match work() {
            Ok(recipe) => ManifestRecord::Recipe(recipe),
            Err(e) => ManifestRecord::Failure(FailureRecord {
                image_key: key.clone(),
                case: None,
                error: e.to_string(),
            }),
        }
    });
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    write_manifest(&out_dir.join("manifest.jsonl"), &records)?;
    Ok(RunReport::new(records))
}

/// Bicubic `x scale` upsampling of every image under `lr_dir`, mirrored
/// into `out_dir`.
pub fn upsample_directory(
    lr_dir: &Path,
    out_dir: &Path,
    scale: usize,
    workers: usize,
) -> Result<RunReport> {
    if scale < 1 {
        return Err(Error::Config("scale must be >= 1".into()));
    }
    let images = discover_images(lr_dir)?;
    if images.is_empty() {
        return Err(Error::EmptyDataset(lr_dir.to_path_buf()));
    }
    let records = crate::batch::run_ordered(&images, workers, |(key, path)| {
        let work = || -> Result<()> {
            let up = upsample_bicubic(&load_image(path)?, scale)?;
            save_png(&out_dir.join(png_rel_path(key)), &up)
        };
        match work() {
            Ok(()) => None,
            Err(e) => Some(ManifestRecord::Failure(FailureRecord {
                image_key: key.clone(),
                case: None,
                error: e.to_string(),
            })),
        }
    });
    Ok(RunReport::new(records.into_iter().flatten().collect()))
}
