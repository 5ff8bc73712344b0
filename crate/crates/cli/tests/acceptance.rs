//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! The Bicubic-row check needs the BSD100 and Set14 HR images, located through
//! `DEGRAFORGE_BSD100_HR` and `DEGRAFORGE_SET14_HR`. Without them it reports
//! FAIL (blocked) and does not change the exit status; every other failure does.

use std::collections::BTreeMap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::Command;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

use degraforge::bench::{generate_benchmark, practical8_cases, BenchOptions};
use degraforge::degrade::jpeg::{decode, encode};
use degraforge::degrade::noise::{add_gaussian_noise, add_poisson_noise, ColorMode, NoiseSpec};
use degraforge::degrade::pipeline::{run_recipe, sample_recipe, PipelineConfig};
use degraforge::degrade::{convolve, downsample_bicubic, jpeg_compress};
use degraforge::fixtures::natural_scene;
use degraforge::gap::compute_gap;
use degraforge::harness::upsample_directory;
use degraforge::kernels::{
    make_anisotropic_gaussian, make_generalized_gaussian, make_isotropic_gaussian, make_plateau,
    BlurKernel,
};
use degraforge::metrics::{evaluate_pairs, psnr, ssim, CaseRow, MetricOptions, MetricTable};
use degraforge::recipe::{BlurParams, NoiseParams, SampledRecipe, SeedTrace};
use degraforge::rng::StageSlot;
use degraforge::PlanarImage;

enum Outcome {
    Pass(String),
    Fail(String),
    Blocked(String),
}

type Check = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn quantized(img: &PlanarImage) -> PlanarImage {
    PlanarImage::from_interleaved_u8(img.width(), img.height(), img.channels(), &img.to_interleaved_u8())
        .unwrap()
}

fn random_image(rng: &mut ChaCha8Rng, w: usize, h: usize, c: usize) -> PlanarImage {
    PlanarImage::from_fn(w, h, c, |_, _, _| rng.random::<f64>()).unwrap()
}

// ---------------------------------------------------------------- bicubic row

const BSD100_ROW: [(&str, f64); 8] = [
    ("bic", 24.63),
    ("b2.0", 25.40),
    ("n20", 21.56),
    ("j60", 24.06),
    ("b2.0n20", 21.90),
    ("b2.0j60", 24.65),
    ("n20j60", 21.22),
    ("b2.0n20j60", 21.72),
];

const SET14_ROW: [(&str, f64); 8] = [
    ("bic", 25.00),
    ("b2.0", 25.34),
    ("n20", 21.77),
    ("j60", 24.29),
    ("b2.0n20", 21.91),
    ("b2.0j60", 24.51),
    ("n20j60", 21.46),
    ("b2.0n20j60", 21.73),
];

fn bicubic_row_for(hr: &Path, expected: &[(&str, f64); 8]) -> Check {
    let work = tempfile::tempdir().map_err(|e| e.to_string())?;
    let lr_root = work.path().join("lr");
    let sr_root = work.path().join("sr");
    let cases = practical8_cases(4);
    let report = generate_benchmark(hr, &lr_root, &cases, &BenchOptions::default()).map_err(|e| e.to_string())?;
    ensure(report.failures == 0, || format!("{} generation failures", report.failures))?;
    for case in &cases {
        upsample_directory(&lr_root.join(&case.name), &sr_root.join(&case.name), 4, 0)
            .map_err(|e| e.to_string())?;
    }
    let names: Vec<String> = cases.iter().map(|c| c.name.clone()).collect();
    let table = evaluate_pairs(&sr_root, hr, &names, &MetricOptions::for_scale(4), 0).map_err(|e| e.to_string())?;
    ensure(table.missing.is_empty(), || format!("missing pairs: {:?}", table.missing))?;
    let mut worst = 0.0f64;
    let mut cells = Vec::new();
    for (case, target) in expected {
        let got = table.row(case).ok_or_else(|| format!("no row for {case}"))?.psnr_mean;
        worst = worst.max((got - target).abs());
        cells.push(format!("{case} {got:.2}/{target:.2}"));
    }
    let detail = format!("max |d| {worst:.2} dB [{}]", cells.join(", "));
    if worst <= 0.5 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn bicubic_row() -> Outcome {
    let sets = [
        ("BSD100", "DEGRAFORGE_BSD100_HR", &BSD100_ROW),
        ("Set14", "DEGRAFORGE_SET14_HR", &SET14_ROW),
    ];
    let mut details = Vec::new();
    let mut failed = false;
    for (name, var, row) in sets {
        let Some(dir) = std::env::var_os(var).map(PathBuf::from).filter(|p| p.is_dir()) else {
            return Outcome::Blocked(format!("{name} HR images not available (set {var})"));
        };
        match bicubic_row_for(&dir, row) {
            Ok(d) => details.push(format!("{name}: {d}")),
            Err(d) => {
                failed = true;
                details.push(format!("{name}: {d}"));
            }
        }
    }
    if failed {
        Outcome::Fail(details.join("; "))
    } else {
        Outcome::Pass(details.join("; "))
    }
}

// ------------------------------------------------------------- gate identities

fn fixed_recipe(key: &str, on: bool) -> SampledRecipe {
    let bit = u8::from(on);
    SampledRecipe {
        image_key: key.into(),
        gate_outcomes: vec![bit; 3],
        blur: on.then(|| BlurParams::isotropic(2.0, 21)),
        noise: on.then(|| NoiseParams::gaussian(20.0, ColorMode::Color)),
        jpeg: on.then_some(60),
        scale: 4,
        seed_trace: SeedTrace::new(11, key),
    }
}

fn gate_identities() -> Check {
    let n = 24;
    let kernel = make_isotropic_gaussian(2.0, 21).unwrap();
    for i in 0..n {
        let img = quantized(&natural_scene(1000 + i, 72 + 4 * i as usize % 20, 57));
        let key = format!("img{i}");

        let off = run_recipe(&img, &fixed_recipe(&key, false)).map_err(|e| e.to_string())?;
        let plain = downsample_bicubic(&img, 4).unwrap();
        ensure(off.samples() == plain.samples(), || format!("{key}: closed gates differ from bicubic"))?;

        let recipe = fixed_recipe(&key, true);
        let on = run_recipe(&img, &recipe).map_err(|e| e.to_string())?;
        let mut rng = recipe.seed_trace.stream(StageSlot::Noise);
        let noisy = add_gaussian_noise(
            &downsample_bicubic(&convolve(&img, &kernel).unwrap(), 4).unwrap(),
            &NoiseSpec::gaussian(20.0, ColorMode::Color),
            &mut rng,
        )
        .unwrap();
        let composed = jpeg_compress(&noisy, 60).unwrap();
        ensure(on.samples() == composed.samples(), || format!("{key}: open gates differ from the composition"))?;
        ensure(on.to_interleaved_u8() == composed.to_interleaved_u8(), || format!("{key}: bytes differ"))?;
    }
    Ok(format!("{n} images, all-zero and all-one gate vectors bit-exact"))
}

// ------------------------------------------------------------- gate statistics

fn gate_statistics() -> Check {
    let n = 100_000;
    let config = PipelineConfig::default();
    let mut counts = [0usize; 8];
    for i in 0..n {
        let r = sample_recipe(&config, &SeedTrace::new(config.master_seed, format!("recipe/{i}")));
        let g = &r.gate_outcomes;
        counts[usize::from(g[0]) | usize::from(g[1]) << 1 | usize::from(g[2]) << 2] += 1;
    }
    let freqs: Vec<f64> = counts.iter().map(|&c| c as f64 / n as f64).collect();
    let worst = freqs.iter().map(|f| (f - 0.125).abs()).fold(0.0, f64::max);
    let detail = format!(
        "max |f - 0.125| = {worst:.4} over {n} recipes [{}]",
        freqs.iter().map(|f| format!("{f:.4}")).collect::<Vec<_>>().join(" ")
    );
    if worst <= 0.005 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

// ---------------------------------------------------------------- kernel suite

fn kernel_suite() -> Check {
    let sigmas = [0.1, 0.35, 0.8, 1.3, 2.0, 2.6, 3.0];
    let thetas = [0.0, 0.3, 1.1, 2.0, 3.0];
    let mut worst_sum = 0.0f64;
    let mut worst_iso = 0.0f64;
    let mut worst_beta = 0.0f64;
    let max_diff = |a: &BlurKernel, b: &BlurKernel| {
        a.weights().iter().zip(b.weights()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
    };
    for &s in &sigmas {
        let iso = make_isotropic_gaussian(s, 21).unwrap();
        for &t in &thetas {
            let sy = (s * 0.6).max(0.1);
            let family = [
                make_anisotropic_gaussian(s, sy, t, 21).unwrap(),
                make_generalized_gaussian(s, sy, t, 0.5 + t, 21).unwrap(),
                make_plateau(s, sy, t, 1.0 + t / 3.0, 21).unwrap(),
                iso.clone(),
            ];
            for k in &family {
                let sum: f64 = k.weights().iter().sum();
                worst_sum = worst_sum.max((sum - 1.0).abs());
                ensure(k.weights().iter().all(|&w| w >= 0.0), || "negative weight".into())?;
            }
            worst_iso = worst_iso.max(max_diff(&make_anisotropic_gaussian(s, s, t, 21).unwrap(), &iso));
            worst_beta = worst_beta.max(max_diff(
                &make_generalized_gaussian(s, sy, t, 1.0, 21).unwrap(),
                &make_anisotropic_gaussian(s, sy, t, 21).unwrap(),
            ));
        }
    }
    let variances: Vec<f64> = (0..10)
        .map(|i| make_isotropic_gaussian(0.1 + 2.9 * i as f64 / 9.0, 21).unwrap().variance())
        .collect();
    let monotone = variances.windows(2).all(|w| w[1] > w[0]);
    let detail = format!(
        "|sum-1| {worst_sum:.1e}, aniso-iso {worst_iso:.1e}, beta1-aniso {worst_beta:.1e}, variance monotone {monotone}"
    );
    if worst_sum <= 1e-6 && worst_iso <= 1e-12 && worst_beta <= 1e-12 && monotone {
        Ok(detail)
    } else {
        Err(detail)
    }
}

// ------------------------------------------------------------ noise statistics

fn noise_statistics() -> Check {
    let side = 1024;
    let grey = PlanarImage::filled(side, side, 1, 0.5).unwrap();
    let trace = SeedTrace::new(5, "noise-field");

    let mut rng = trace.stream(StageSlot::Noise);
    let noisy = add_gaussian_noise(&grey, &NoiseSpec::gaussian(20.0, ColorMode::Color), &mut rng).unwrap();
    let n = noisy.samples().len() as f64;
    let mean = noisy.samples().iter().sum::<f64>() / n;
    let std = (noisy.samples().iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n).sqrt();
    let target = 20.0 / 255.0;
    let std_err = (std - target).abs() / target;

    let mut rng = trace.stream(StageSlot::Jpeg);
    let counted = add_poisson_noise(&grey, &NoiseSpec::poisson(1000.0, ColorMode::Color), &mut rng).unwrap();
    let mean = counted.samples().iter().sum::<f64>() / n;
    let var = counted.samples().iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    let var_err = (var - 5e-4).abs() / 5e-4;

    let detail = format!(
        "gaussian std {std:.5} ({:.2}% off), poisson var {var:.3e} ({:.2}% off)",
        100.0 * std_err,
        100.0 * var_err
    );
    if std_err <= 0.02 && var_err <= 0.05 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

// ------------------------------------------------ convolution and resampling

fn reflect101_ref(mut i: isize, n: usize) -> usize {
    let n = n as isize;
    if n == 1 {
        return 0;
    }
    loop {
        if i < 0 {
            i = -i;
        } else if i >= n {
            i = 2 * (n - 1) - i;
        } else {
            return i as usize;
        }
    }
}

fn convolve_ref(img: &PlanarImage, k: &BlurKernel) -> PlanarImage {
    let size = k.size();
    let r = (size / 2) as isize;
    PlanarImage::from_fn(img.width(), img.height(), img.channels(), |c, y, x| {
        let mut acc = 0.0;
        for ky in 0..size {
            for kx in 0..size {
                let sy = reflect101_ref(y as isize + r - ky as isize, img.height());
                let sx = reflect101_ref(x as isize + r - kx as isize, img.width());
                acc += k.weights()[ky * size + kx] * img.get(c, sy, sx);
            }
        }
        acc.clamp(0.0, 1.0)
    })
    .unwrap()
}

fn cubic_ref(x: f64) -> f64 {
    let t = x.abs();
    if t < 1.0 {
        1.5 * t.powi(3) - 2.5 * t.powi(2) + 1.0
    } else if t < 2.0 {
        -0.5 * t.powi(3) + 2.5 * t.powi(2) - 4.0 * t + 2.0
    } else {
        0.0
    }
}

/// Dense `out_len x in_len` resampling matrix for a downscale by `s`.
fn resample_matrix(in_len: usize, s: usize) -> Vec<Vec<f64>> {
    let out_len = in_len / s;
    let s = s as f64;
    (0..out_len)
        .map(|i| {
            let center = (i as f64 + 0.5) * s - 0.5;
            let mut row = vec![0.0; in_len];
            let lo = (center - 2.0 * s).floor() as isize - 1;
            let hi = (center + 2.0 * s).ceil() as isize + 1;
            for j in lo..=hi {
                let mut m = j;
                while m < 0 || m >= in_len as isize {
                    m = if m < 0 { -1 - m } else { 2 * in_len as isize - 1 - m };
                }
                row[m as usize] += cubic_ref((j as f64 - center) / s);
            }
            let sum: f64 = row.iter().sum();
            row.iter().map(|v| v / sum).collect()
        })
        .collect()
}

fn downsample_ref(img: &PlanarImage, s: usize) -> PlanarImage {
    let wx = resample_matrix(img.width(), s);
    let wy = resample_matrix(img.height(), s);
    PlanarImage::from_fn(wx.len(), wy.len(), img.channels(), |c, y, x| {
        let mut acc = 0.0;
        for (i, wyi) in wy[y].iter().enumerate() {
            for (j, wxj) in wx[x].iter().enumerate() {
                acc += wyi * wxj * img.get(c, i, j);
            }
        }
        acc.clamp(0.0, 1.0)
    })
    .unwrap()
}

fn convolution_and_resampling() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for trial in 0..20 {
        let (w, h) = (rng.random_range(1..=16), rng.random_range(1..=16));
        let max_size = (2 * w.min(h) + 1).min(21);
        let size = 2 * rng.random_range(1..=(max_size - 1) / 2) + 1;
        let raw: Vec<f64> = (0..size * size).map(|_| rng.random::<f64>()).collect();
        let total: f64 = raw.iter().sum();
        let kernel = BlurKernel::from_weights(size, raw.iter().map(|v| v / total).collect()).unwrap();
        let img = random_image(&mut rng, w, h, 3);
        let got = convolve(&img, &kernel).map_err(|e| e.to_string())?;
        ensure(got == convolve_ref(&img, &kernel), || {
            format!("convolution trial {trial} ({w}x{h}, k{size}) differs from the direct sum")
        })?;
    }
    let mut worst = 0.0f64;
    for trial in 0..20 {
        let s = [2, 3, 4][trial % 3];
        let (w, h) = (rng.random_range(s..=40), rng.random_range(s..=40));
        let img = random_image(&mut rng, w, h, 3);
        let got = downsample_bicubic(&img, s).map_err(|e| e.to_string())?;
        let want = downsample_ref(&img, s);
        ensure(got.same_shape(&want), || format!("resample trial {trial}: shape mismatch"))?;
        for (a, b) in got.samples().iter().zip(want.samples()) {
            worst = worst.max((a - b).abs());
        }
    }
    let detail = format!("20 convolutions bit-exact; 20 downsamples max |d| {worst:.1e}");
    if worst <= 1e-9 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

// ------------------------------------------------------------------------ jpeg

fn jpeg_behavior() -> Check {
    let corpus: Vec<PlanarImage> = (0..10).map(|i| quantized(&natural_scene(300 + i, 96, 80))).collect();
    let opts = MetricOptions::uncropped();
    let mut means = Vec::new();
    for q in [40u8, 60, 95] {
        let total: f64 = corpus
            .iter()
            .map(|img| psnr(img, &jpeg_compress(img, q).unwrap(), &opts).unwrap())
            .sum();
        means.push(total / corpus.len() as f64);
    }
    let grating = quantized(
        &PlanarImage::from_fn(128, 96, 3, |c, y, x| {
            0.5 + 0.3 * (0.4 * x as f64 + 0.25 * y as f64).sin() * (1.0 - 0.1 * c as f64)
        })
        .unwrap(),
    );
    let q100 = psnr(&grating, &jpeg_compress(&grating, 100).unwrap(), &opts).unwrap();
    let mut deterministic = true;
    for img in &corpus {
        let (a, b) = (encode(img, 75), encode(img, 75));
        deterministic &= a == b && decode(&a).unwrap() == decode(&b).unwrap();
    }
    let detail = format!(
        "mean PSNR q40 {:.2} < q60 {:.2} < q95 {:.2}; q100 {q100:.2} dB; deterministic {deterministic}",
        means[0], means[1], means[2]
    );
    if means[0] < means[1] && means[1] < means[2] && q100 > 40.0 && deterministic {
        Ok(detail)
    } else {
        Err(detail)
    }
}

// ------------------------------------------------------------------ determinism

fn digest_tree(root: &Path) -> BTreeMap<String, String> {
    let mut out = BTreeMap::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in std::fs::read_dir(&dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                let rel = path.strip_prefix(root).unwrap().to_string_lossy().replace('\\', "/");
                let bytes = std::fs::read(&path).unwrap();
                let hex: String = Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect();
                out.insert(rel, hex);
            }
        }
    }
    out
}

fn determinism() -> Check {
    let hr = tempfile::tempdir().map_err(|e| e.to_string())?;
    for i in 0..50u64 {
        let img = natural_scene(500 + i, 48 + (i as usize % 5) * 4, 40);
        degraforge::io::save_png(&hr.path().join(format!("img{i:02}.png")), &img).map_err(|e| e.to_string())?;
    }
    let mut digests = Vec::new();
    for workers in [1, 4, 16] {
        let out = tempfile::tempdir().map_err(|e| e.to_string())?;
        let status = Command::new(env!("CARGO_BIN_EXE_degraforge"))
            .arg("synth")
            .arg(hr.path())
            .arg(out.path())
            .args(["--seed", "7", "--workers", &workers.to_string()])
            .output()
            .map_err(|e| e.to_string())?;
        ensure(status.status.success(), || {
            format!("synth --workers {workers} failed: {}", String::from_utf8_lossy(&status.stderr))
        })?;
        digests.push(digest_tree(out.path()));
    }
    ensure(digests[0].len() == 51, || format!("expected 51 files, got {}", digests[0].len()))?;
    ensure(digests[0] == digests[1] && digests[1] == digests[2], || "digests differ across worker counts".into())?;
    Ok(format!("{} files identical for workers 1/4/16", digests[0].len()))
}

// ------------------------------------------------------------------------- gap

fn table(rows: &[(&str, f64)]) -> MetricTable {
    MetricTable {
        rows: rows
            .iter()
            .map(|&(case, psnr_mean)| CaseRow {
                case: case.into(),
                n_images: None,
                psnr_mean,
                ssim_mean: None,
                images: vec![],
            })
            .collect(),
        missing: vec![],
    }
}

fn gap_arithmetic() -> Check {
    let method = table(&[("bic", 26.51), ("0.6", 27.25), ("1.2", 28.07), ("1.8", 28.42), ("2.4", 28.43)]);
    let upper = table(&[("bic", 26.75), ("0.6", 27.46), ("1.2", 28.43), ("1.8", 28.71), ("2.4", 28.74)]);
    let gap = compute_gap(&method, &upper).map_err(|e| e.to_string())?;
    let deltas: Vec<String> = gap.rows.iter().map(|r| format!("{:.2}", r.delta)).collect();
    ensure(deltas == ["0.24", "0.21", "0.36", "0.29", "0.31"], || format!("deltas {deltas:?}"))?;
    let expect = [0.24, 0.21, 0.36, 0.29, 0.31];
    ensure(gap.rows.iter().zip(expect).all(|(r, e)| (r.delta - e).abs() < 1e-9), || "deltas drift".into())?;
    let same = compute_gap(&method, &method).map_err(|e| e.to_string())?;
    ensure(same.rows.iter().all(|r| r.delta == 0.0), || "self gap is not zero".into())?;
    Ok(format!("deltas {} (max at {}); self gap all zero", deltas.join(" "), gap.summary.argmax_case))
}

// --------------------------------------------------------------------- metrics

fn metric_contracts() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let opts = MetricOptions::default();
    let mut worst_20 = 0.0f64;
    let mut worst_sym = 0.0f64;
    for _ in 0..10 {
        let a = PlanarImage::from_fn(48, 40, 3, |_, _, _| rng.random_range(0.0..0.9)).unwrap();
        let shifted = PlanarImage::new(48, 40, 3, a.samples().iter().map(|v| v + 0.1).collect()).unwrap();
        worst_20 = worst_20.max((psnr(&a, &shifted, &opts).unwrap() - 20.0).abs());
        ensure(ssim(&a, &a, &opts).unwrap() == 1.0, || "ssim(a, a) != 1".into())?;
        ensure(psnr(&a, &a, &opts).unwrap() == f64::INFINITY, || "psnr(a, a) is finite".into())?;
        let b = random_image(&mut rng, 48, 40, 3);
        worst_sym = worst_sym
            .max((psnr(&a, &b, &opts).unwrap() - psnr(&b, &a, &opts).unwrap()).abs())
            .max((ssim(&a, &b, &opts).unwrap() - ssim(&b, &a, &opts).unwrap()).abs());
    }
    let detail = format!("|psnr(a, a+0.1) - 20| {worst_20:.1e}; symmetry {worst_sym:.1e}; ssim(a,a) = 1");
    if worst_20 < 1e-9 && worst_sym <= 1e-12 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn run(name: &str, f: impl FnOnce() -> Outcome) -> Outcome {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(o) => o,
        Err(p) => {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Outcome::Fail(format!("{name} panicked: {msg}"))
        }
    }
}

fn from_check(c: Check) -> Outcome {
    match c {
        Ok(d) => Outcome::Pass(d),
        Err(d) => Outcome::Fail(d),
    }
}

fn main() {
    let criteria: Vec<(&str, Box<dyn FnOnce() -> Outcome>)> = vec![
        ("bicubic-row", Box::new(bicubic_row)),
        ("gate-identities", Box::new(|| from_check(gate_identities()))),
        ("gate-statistics", Box::new(|| from_check(gate_statistics()))),
        ("kernel-suite", Box::new(|| from_check(kernel_suite()))),
        ("noise-statistics", Box::new(|| from_check(noise_statistics()))),
        ("convolution-resampling-oracles", Box::new(|| from_check(convolution_and_resampling()))),
        ("jpeg-behavior", Box::new(|| from_check(jpeg_behavior()))),
        ("determinism-under-parallelism", Box::new(|| from_check(determinism()))),
        ("gap-arithmetic", Box::new(|| from_check(gap_arithmetic()))),
        ("metric-contracts", Box::new(|| from_check(metric_contracts()))),
    ];
    let mut failed = 0;
    for (name, f) in criteria {
        match run(name, f) {
            Outcome::Pass(d) => println!("PASS {name}: {d}"),
            Outcome::Fail(d) => {
                failed += 1;
                println!("FAIL {name}: {d}");
            }
            Outcome::Blocked(d) => println!("FAIL {name} (blocked): {d}"),
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
