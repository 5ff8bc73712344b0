use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use degraforge::bench::{classical5_cases, generate_benchmark, practical8_cases, BenchOptions};
use degraforge::degrade::pipeline::PipelineConfig;
use degraforge::gap::compute_gap;
use degraforge::harness::{synthesize_dataset, upsample_directory, SynthOptions};
use degraforge::kernels::{dump_kernel, make_kernel, KernelParams, KernelType, DEFAULT_KERNEL_SIZE};
use degraforge::metrics::{evaluate_pairs, ColorSpace, MetricOptions, MetricTable};
use degraforge::Error;

#[derive(Parser)]
#[command(name = "degraforge", version, about = "Degradation synthesis and evaluation for blind super-resolution")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Workers {
    /// Worker threads; 0 uses every core.
    #[arg(long, env = "DEGRAFORGE_WORKERS", default_value_t = 0)]
    workers: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Degrade every HR image with a freshly sampled recipe.
    Synth {
        hr_dir: PathBuf,
        out_dir: PathBuf,
        /// Pipeline configuration (JSON); defaults to the gated light model.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        /// Cut a random N x N HR patch first and write it next to the LR.
        #[arg(long)]
        crop: Option<usize>,
        #[command(flatten)]
        workers: Workers,
    },
    /// Write the fixed-parameter validation cases.
    Practical8 {
        hr_dir: PathBuf,
        out_dir: PathBuf,
        #[arg(long, default_value_t = 4)]
        scale: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Use bic plus the four blur levels instead.
        #[arg(long)]
        classical5: bool,
        #[command(flatten)]
        workers: Workers,
    },
    /// Score restored images against HR, one column per case directory.
    Eval {
        sr_dir: PathBuf,
        hr_dir: PathBuf,
        /// Comma-separated case directories; defaults to all of them.
        #[arg(long, value_delimiter = ',')]
        cases: Vec<String>,
        #[arg(long, default_value = "rgb_mean")]
        color_space: ColorSpace,
        /// Border pixels to ignore on each side.
        #[arg(long, default_value_t = 4)]
        crop: usize,
        /// Trim HR to a multiple of N before comparing; 0 disables.
        #[arg(long, default_value_t = 4)]
        modcrop: usize,
        /// Row label in the Markdown table.
        #[arg(long, default_value = "Bicubic")]
        method: String,
        #[arg(long)]
        csv: Option<PathBuf>,
        #[arg(long)]
        markdown: Option<PathBuf>,
        #[command(flatten)]
        workers: Workers,
    },
    /// Per-case PSNR distance from a method to its upper bound.
    Gap {
        method_csv: PathBuf,
        upper_csv: PathBuf,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Bicubic upsampling of every LR image.
    Upsample {
        lr_dir: PathBuf,
        out_dir: PathBuf,
        #[arg(long, default_value_t = 4)]
        scale: usize,
        #[command(flatten)]
        workers: Workers,
    },
    /// Print a blur kernel as whitespace-separated rows.
    Kernel {
        #[arg(long = "type", default_value = "isotropic_gaussian")]
        kernel_type: KernelType,
        #[arg(long, default_value_t = 1.0)]
        sigma_x: f64,
        /// Defaults to sigma-x.
        #[arg(long)]
        sigma_y: Option<f64>,
        #[arg(long, default_value_t = 0.0)]
        theta: f64,
        #[arg(long, default_value_t = 1.0)]
        beta: f64,
        #[arg(long, default_value_t = DEFAULT_KERNEL_SIZE)]
        size: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

enum Failure {
    Usage(String),
    Run(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Param(_) | Error::Config(_) | Error::Json(_) | Error::UnsupportedKernelSize { .. } => {
                Failure::Usage(e.to_string())
            }
            other => Failure::Run(other.to_string()),
        }
    }
}

fn write_file(path: &Path, text: &str) -> Result<(), Failure> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(|e| Failure::Run(format!("{}: {e}", parent.display())))?;
    }
    std::fs::write(path, text).map_err(|e| Failure::Run(format!("{}: {e}", path.display())))
}

/// Known case names first, in benchmark order, then the rest sorted.
fn default_cases(sr_dir: &Path) -> Result<Vec<String>, Failure> {
    let entries = std::fs::read_dir(sr_dir).map_err(|e| Failure::Run(format!("{}: {e}", sr_dir.display())))?;
    let mut found: Vec<String> = entries
        .filter_map(|e| e.ok())
        .filter(|e| e.path().is_dir())
        .map(|e| e.file_name().to_string_lossy().into_owned())
        .collect();
    found.sort();
    let known: Vec<String> = practical8_cases(4)
        .into_iter()
        .chain(classical5_cases(4))
        .map(|c| c.name)
        .collect();
    let mut ordered: Vec<String> = Vec::new();
    for name in &known {
        if found.contains(name) && !ordered.contains(name) {
            ordered.push(name.clone());
        }
    }
    ordered.extend(found.into_iter().filter(|n| !known.contains(n)));
    Ok(ordered)
}

fn report_failures(failures: usize, total: usize) -> u8 {
    if failures > 0 {
        eprintln!("{failures} of {total} items failed; see manifest");
        1
    } else {
        0
    }
}

fn run(cli: Cli) -> Result<u8, Failure> {
    match cli.command {
        Command::Synth { hr_dir, out_dir, config, seed, crop, workers } => {
            let mut cfg = match config {
                Some(path) => PipelineConfig::load(&path)?,
                None => PipelineConfig::default(),
            };
            if let Some(s) = seed {
                cfg.master_seed = s;
            }
            let report = synthesize_dataset(&hr_dir, &out_dir, &cfg, &SynthOptions { workers: workers.workers, crop })?;
            println!("{} images, manifest at {}", report.records.len(), out_dir.join("manifest.jsonl").display());
            Ok(report_failures(report.failures, report.records.len()))
        }
        Command::Practical8 { hr_dir, out_dir, scale, seed, classical5, workers } => {
            if scale < 1 {
                return Err(Failure::Usage("scale must be >= 1".into()));
            }
            let cases = if classical5 { classical5_cases(scale) } else { practical8_cases(scale) };
            let names: Vec<&str> = cases.iter().map(|c| c.name.as_str()).collect();
            println!("cases: {}", names.join(" "));
            let opts = BenchOptions { master_seed: seed, workers: workers.workers, ..BenchOptions::default() };
            let report = generate_benchmark(&hr_dir, &out_dir, &cases, &opts)?;
            println!("{} files written", report.written);
            Ok(report_failures(report.failures, report.records.len()))
        }
        Command::Eval { sr_dir, hr_dir, cases, color_space, crop, modcrop, method, csv, markdown, workers } => {
            let cases = if cases.is_empty() { default_cases(&sr_dir)? } else { cases };
            if cases.is_empty() {
                return Err(Failure::Usage(format!("no case directories under {}", sr_dir.display())));
            }
            let opts = MetricOptions { border_crop: crop, modcrop, color_space, ..MetricOptions::default() };
            let table = evaluate_pairs(&sr_dir, &hr_dir, &cases, &opts, workers.workers)?;
            for m in &table.missing {
                eprintln!("missing: {m}");
            }
            if table.rows.is_empty() {
                return Err(Failure::Run("no image pairs could be scored".into()));
            }
            let md = table.to_markdown(&method);
            print!("{md}");
            if let Some(path) = csv {
                write_file(&path, &table.to_csv()?)?;
            }
            if let Some(path) = markdown {
                write_file(&path, &md)?;
            }
            Ok(u8::from(!table.missing.is_empty()))
        }
        Command::Gap { method_csv, upper_csv, csv } => {
            let method = MetricTable::read_csv(&method_csv)?;
            let upper = MetricTable::read_csv(&upper_csv)?;
            let gap = compute_gap(&method, &upper).map_err(|e| Failure::Run(e.to_string()))?;
            print!("{}", gap.to_markdown());
            if let Some(path) = csv {
                write_file(&path, &gap.to_csv()?)?;
            }
            Ok(0)
        }
        Command::Upsample { lr_dir, out_dir, scale, workers } => {
            let report = upsample_directory(&lr_dir, &out_dir, scale, workers.workers)?;
            for r in &report.records {
                if let degraforge::recipe::ManifestRecord::Failure(f) = r {
                    eprintln!("{}: {}", f.image_key, f.error);
                }
            }
            Ok(u8::from(report.failures > 0))
        }
        Command::Kernel { kernel_type, sigma_x, sigma_y, theta, beta, size, out } => {
            let params = KernelParams {
                sigma_x,
                sigma_y: sigma_y.unwrap_or(sigma_x),
                rotation_radians: theta,
                shape_beta: beta,
            };
            let dump = dump_kernel(&make_kernel(kernel_type, params, size)?);
            match out {
                Some(path) => write_file(&path, &dump)?,
                None => print!("{dump}"),
            }
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Run(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
