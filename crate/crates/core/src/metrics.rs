//! Full-reference fidelity metrics and per-case aggregation.
//!
//! PSNR defaults to the mean squared error over all RGB samples after
//! cropping `border_crop` pixels from every edge. SSIM is the single-scale
//! Gaussian-window index on the luma channel. The luma used by both is the
//! BT.601 studio-range Y (`16/255 + (65.481 R + 128.553 G + 24.966 B) / 255`),
//! the convention super-resolution benchmarks report as "Y channel".

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::PlanarImage;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ColorSpace {
    RgbMean,
    LumaY,
}

impl FromStr for ColorSpace {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rgb_mean" | "rgb" => Ok(ColorSpace::RgbMean),
            "luma_y" | "y" => Ok(ColorSpace::LumaY),
            other => Err(Error::param(format!("unknown color space {other:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SsimParams {
    pub window: usize,
    pub sigma: f64,
    pub k1: f64,
    pub k2: f64,
    pub dynamic_range: f64,
}

impl Default for SsimParams {
    fn default() -> Self {
        Self {
            window: 11,
            sigma: 1.5,
            k1: 0.01,
            k2: 0.03,
            dynamic_range: 1.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MetricOptions {
    pub border_crop: usize,
    /// Directory evaluation trims HR images to a multiple of this at the
    /// top-left before comparing; `0` disables.
    pub modcrop: usize,
    pub color_space: ColorSpace,
    pub ssim: SsimParams,
}

impl MetricOptions {
    /// Crop equal to the super-resolution scale, RGB mean.
    pub fn for_scale(scale: usize) -> Self {
        Self {
            border_crop: scale,
            modcrop: scale,
            color_space: ColorSpace::RgbMean,
            ssim: SsimParams::default(),
        }
    }

    pub fn uncropped() -> Self {
        Self::for_scale(0)
    }
}

impl Default for MetricOptions {
    fn default() -> Self {
        Self::for_scale(4)
    }
}

/// Studio-range BT.601 luma.
pub fn luma_y(image: &PlanarImage) -> Vec<f64> {
    if image.channels() == 1 {
        return image.samples().to_vec();
    }
    let (r, g, b) = (image.plane(0), image.plane(1), image.plane(2));
    r.iter()
        .zip(g)
        .zip(b)
        .map(|((&r, &g), &b)| (16.0 + 65.481 * r + 128.553 * g + 24.966 * b) / 255.0)
        .collect()
}

fn check_pair(a: &PlanarImage, b: &PlanarImage, crop: usize) -> Result<(usize, usize)> {
    if !a.same_shape(b) {
        return Err(Error::Dimension(format!(
            "{}x{}x{} vs {}x{}x{}",
            a.width(),
            a.height(),
            a.channels(),
            b.width(),
            b.height(),
            b.channels()
        )));
    }
    if 2 * crop >= a.width().min(a.height()) {
        return Err(Error::param(format!(
            "border crop {crop} leaves nothing of a {}x{} image",
            a.width(),
            a.height()
        )));
    }
    Ok((a.width() - 2 * crop, a.height() - 2 * crop))
}

/// Planes to compare, already cropped: either every channel or just luma.
fn planes(image: &PlanarImage, space: ColorSpace, crop: usize) -> Vec<Vec<f64>> {
    let (w, h) = (image.width(), image.height());
    let crop_plane = |p: &[f64]| -> Vec<f64> {
        (crop..h - crop)
            .flat_map(|y| p[y * w + crop..y * w + w - crop].iter().copied())
            .collect()
    };
    match space {
        ColorSpace::RgbMean => (0..image.channels()).map(|c| crop_plane(image.plane(c))).collect(),
        ColorSpace::LumaY => vec![crop_plane(&luma_y(image))],
    }
}

/// Mean squared error after cropping and color handling.
pub fn mse(a: &PlanarImage, b: &PlanarImage, opts: &MetricOptions) -> Result<f64> {
    check_pair(a, b, opts.border_crop)?;
    let pa = planes(a, opts.color_space, opts.border_crop);
    let pb = planes(b, opts.color_space, opts.border_crop);
    let mut sum = 0.0;
    let mut n = 0usize;
    for (x, y) in pa.iter().zip(&pb) {
        for (u, v) in x.iter().zip(y) {
            let d = u - v;
            sum += d * d;
        }
        n += x.len();
    }
    Ok(sum / n as f64)
}

/// PSNR in dB for a peak of 1.0; `f64::INFINITY` when the images match.
pub fn psnr(a: &PlanarImage, b: &PlanarImage, opts: &MetricOptions) -> Result<f64> {
    let m = mse(a, b, opts)?;
    if m == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(10.0 * (1.0 / m).log10())
}

fn gaussian_window(size: usize, sigma: f64) -> Vec<f64> {
    let r = (size / 2) as f64;
    let w: Vec<f64> = (0..size)
        .map(|i| (-((i as f64 - r).powi(2)) / (2.0 * sigma * sigma)).exp())
        .collect();
    let s: f64 = w.iter().sum();
    w.into_iter().map(|v| v / s).collect()
}

/// Separable "valid" filtering of a `w x h` plane.
fn filter_valid(p: &[f64], w: usize, h: usize, win: &[f64]) -> Vec<f64> {
    let k = win.len();
    let (ow, oh) = (w - k + 1, h - k + 1);
    let mut rows = vec![0.0; ow * h];
    for y in 0..h {
        for x in 0..ow {
            rows[y * ow + x] = win.iter().enumerate().map(|(i, &c)| c * p[y * w + x + i]).sum();
        }
    }
    let mut out = vec![0.0; ow * oh];
    for y in 0..oh {
        for x in 0..ow {
            out[y * ow + x] = win.iter().enumerate().map(|(i, &c)| c * rows[(y + i) * ow + x]).sum();
        }
    }
    out
}

/// Mean SSIM over all fully covered window positions of two equal-size planes.
pub fn ssim_plane(a: &[f64], b: &[f64], w: usize, h: usize, params: &SsimParams) -> Result<f64> {
    if w < params.window || h < params.window {
        return Err(Error::Dimension(format!(
            "{w}x{h} plane is smaller than the {} pixel SSIM window",
            params.window
        )));
    }
    let win = gaussian_window(params.window, params.sigma);
    let c1 = (params.k1 * params.dynamic_range).powi(2);
    let c2 = (params.k2 * params.dynamic_range).powi(2);
    let aa: Vec<f64> = a.iter().map(|v| v * v).collect();
    let bb: Vec<f64> = b.iter().map(|v| v * v).collect();
    let ab: Vec<f64> = a.iter().zip(b).map(|(x, y)| x * y).collect();
    let mu_a = filter_valid(a, w, h, &win);
    let mu_b = filter_valid(b, w, h, &win);
    let e_aa = filter_valid(&aa, w, h, &win);
    let e_bb = filter_valid(&bb, w, h, &win);
    let e_ab = filter_valid(&ab, w, h, &win);
    let mut total = 0.0;
    for i in 0..mu_a.len() {
        let (ma, mb) = (mu_a[i], mu_b[i]);
        let va = e_aa[i] - ma * ma;
        let vb = e_bb[i] - mb * mb;
        let cov = e_ab[i] - ma * mb;
        total += ((2.0 * ma * mb + c1) * (2.0 * cov + c2))
            / ((ma * ma + mb * mb + c1) * (va + vb + c2));
    }
    Ok(total / mu_a.len() as f64)
}

/// Single-scale SSIM on the luma channel.
pub fn ssim(a: &PlanarImage, b: &PlanarImage, opts: &MetricOptions) -> Result<f64> {
    let (w, h) = check_pair(a, b, opts.border_crop)?;
    let la = planes(a, ColorSpace::LumaY, opts.border_crop);
    let lb = planes(b, ColorSpace::LumaY, opts.border_crop);
    ssim_plane(&la[0], &lb[0], w, h, &opts.ssim)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ImageScore {
    pub image_key: String,
    pub psnr: f64,
    pub ssim: f64,
}

/// Aggregate scores of one degradation case.
#[derive(Clone, Debug, PartialEq)]
pub struct CaseRow {
    pub case: String,
    pub n_images: Option<usize>,
    pub psnr_mean: f64,
    pub ssim_mean: Option<f64>,
    pub images: Vec<ImageScore>,
}

impl CaseRow {
    pub fn from_scores(case: impl Into<String>, images: Vec<ImageScore>) -> Self {
        let n = images.len();
        let psnr_mean = images.iter().map(|s| s.psnr).sum::<f64>() / n as f64;
        let ssim_mean = images.iter().map(|s| s.ssim).sum::<f64>() / n as f64;
        Self {
            case: case.into(),
            n_images: Some(n),
            psnr_mean,
            ssim_mean: (n > 0).then_some(ssim_mean),
            images,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct MetricTable {
    pub rows: Vec<CaseRow>,
    /// `case/image` entries whose counterpart was missing or unreadable.
    pub missing: Vec<String>,
}

fn fmt_value(v: f64) -> String {
    if v.is_infinite() && v > 0.0 {
        "inf".to_string()
    } else {
        format!("{v}")
    }
}

fn fmt_fixed(v: f64) -> String {
    if v.is_infinite() && v > 0.0 {
        "inf".to_string()
    } else {
        format!("{v:.2}")
    }
}

impl MetricTable {
    pub fn row(&self, case: &str) -> Option<&CaseRow> {
        self.rows.iter().find(|r| r.case == case)
    }

    /// Mean of the per-case PSNR means.
    pub fn average_psnr(&self) -> f64 {
        self.rows.iter().map(|r| r.psnr_mean).sum::<f64>() / self.rows.len() as f64
    }

    pub fn average_ssim(&self) -> Option<f64> {
        let v: Option<Vec<f64>> = self.rows.iter().map(|r| r.ssim_mean).collect();
        v.filter(|v| !v.is_empty())
            .map(|v| v.iter().sum::<f64>() / v.len() as f64)
    }

    /// `case,n_images,psnr_mean,ssim_mean`; infinite PSNR is written as `inf`.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["case", "n_images", "psnr_mean", "ssim_mean"])?;
        for r in &self.rows {
            w.write_record([
                r.case.clone(),
                r.n_images.map(|n| n.to_string()).unwrap_or_default(),
                fmt_value(r.psnr_mean),
                r.ssim_mean.map(fmt_value).unwrap_or_default(),
            ])?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Table(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| Error::Table(e.to_string()))
    }

    /// Parses the CSV layout of [`MetricTable::to_csv`]. `n_images` and
    /// `ssim_mean` may be blank, which is how published tables are entered.
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(text.as_bytes());
        let headers = reader.headers()?.clone();
        let col = |name: &str| {
            headers
                .iter()
                .position(|h| h == name)
                .ok_or_else(|| Error::Table(format!("missing column {name:?}")))
        };
        let (ci, pi) = (col("case")?, col("psnr_mean")?);
        let ni = headers.iter().position(|h| h == "n_images");
        let si = headers.iter().position(|h| h == "ssim_mean");
        let mut rows = Vec::new();
        for rec in reader.records() {
            let rec = rec?;
            let field = |i: usize| rec.get(i).unwrap_or("");
            let parse = |s: &str| -> Result<f64> {
                s.parse::<f64>()
                    .map_err(|e| Error::Table(format!("bad number {s:?}: {e}")))
            };
            let case = field(ci).to_string();
            if case.is_empty() {
                return Err(Error::Table("empty case name".into()));
            }
            let n_images = match ni.map(field).filter(|s| !s.is_empty()) {
                Some(s) => Some(
                    s.parse::<usize>()
                        .map_err(|e| Error::Table(format!("bad n_images {s:?}: {e}")))?,
                ),
                None => None,
            };
            let ssim_mean = match si.map(field).filter(|s| !s.is_empty()) {
                Some(s) => Some(parse(s)?),
                None => None,
            };
            rows.push(CaseRow {
                case,
                n_images,
                psnr_mean: parse(field(pi))?,
                ssim_mean,
                images: Vec::new(),
            });
        }
        Ok(Self {
            rows,
            missing: Vec::new(),
        })
    }

    pub fn read_csv(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_csv(&text)
    }

    /// One-row Markdown table: cases as columns plus the average.
    pub fn to_markdown(&self, method: &str) -> String {
        let mut out = String::new();
        let cases: Vec<&str> = self.rows.iter().map(|r| r.case.as_str()).collect();
        writeln!(out, "| Method | {} | Average |", cases.join(" | ")).unwrap();
        writeln!(out, "|---|{}---|", "---|".repeat(cases.len())).unwrap();
        let psnr: Vec<String> = self.rows.iter().map(|r| fmt_fixed(r.psnr_mean)).collect();
        writeln!(
            out,
            "| {method} (PSNR) | {} | {} |",
            psnr.join(" | "),
            fmt_fixed(self.average_psnr())
        )
        .unwrap();
        if let Some(avg) = self.average_ssim() {
            let ssim: Vec<String> = self
                .rows
                .iter()
                .map(|r| format!("{:.4}", r.ssim_mean.unwrap_or(f64::NAN)))
                .collect();
            writeln!(out, "| {method} (SSIM) | {} | {avg:.4} |", ssim.join(" | ")).unwrap();
        }
        out
    }
}

/// Trims to the largest multiple of `m` in each dimension.
pub fn modcrop(image: PlanarImage, m: usize) -> Result<PlanarImage> {
    if m <= 1 {
        return Ok(image);
    }
    let (w, h) = (image.width() - image.width() % m, image.height() - image.height() % m);
    if (w, h) == (image.width(), image.height()) {
        return Ok(image);
    }
    image.crop(0, 0, w, h)
}

/// Scores `sr_dir/<case>/<stem>.png` against the HR image with the same
/// relative stem, for every case. Cases keep the given order.
pub fn evaluate_pairs(
    sr_dir: &Path,
    hr_dir: &Path,
    cases: &[String],
    opts: &MetricOptions,
    workers: usize,
) -> Result<MetricTable> {
    let hr = crate::io::discover_images(hr_dir)?;
    if hr.is_empty() {
        return Err(Error::EmptyDataset(hr_dir.to_path_buf()));
    }
    let hr_by_stem: BTreeMap<String, &Path> = hr
        .iter()
        .map(|(key, path)| (crate::io::strip_extension(key), path.as_path()))
        .collect();

    let mut table = MetricTable::default();
    for case in cases {
        let case_dir = sr_dir.join(case);
        let sr = if case_dir.is_dir() {
            crate::io::discover_images(&case_dir)?
        } else {
            Vec::new()
        };
        let sr_by_stem: BTreeMap<String, &Path> = sr
            .iter()
            .map(|(key, path)| (crate::io::strip_extension(key), path.as_path()))
            .collect();
        for stem in sr_by_stem.keys().filter(|s| !hr_by_stem.contains_key(*s)) {
            table.missing.push(format!("{case}/{stem}: no HR counterpart"));
        }
        let pairs: Vec<(&String, &Path, Option<&Path>)> = hr_by_stem
            .iter()
            .map(|(stem, hr_path)| (stem, *hr_path, sr_by_stem.get(stem).copied()))
            .collect();
        let results = crate::batch::run_ordered(&pairs, workers, |&(stem, hr_path, sr_path)| {
            let sr_path = sr_path.ok_or_else(|| format!("{case}/{stem}: no SR counterpart"))?;
            let score = || -> Result<ImageScore> {
                let a = crate::io::load_image(sr_path)?;
                let b = modcrop(crate::io::load_image(hr_path)?, opts.modcrop)?;
                Ok(ImageScore {
                    image_key: stem.clone(),
                    psnr: psnr(&a, &b, opts)?,
                    ssim: ssim(&a, &b, opts)?,
                })
            };
            score().map_err(|e| format!("{case}/{stem}: {e}"))
        });
        let mut scores = Vec::new();
        for r in results {
            match r {
                Ok(s) => scores.push(s),
                Err(msg) => table.missing.push(msg),
            }
        }
        if !scores.is_empty() {
            table.rows.push(CaseRow::from_scores(case.clone(), scores));
        }
    }
    Ok(table)
}
