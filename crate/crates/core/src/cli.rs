//! The `kantorovich` command-line front end.
//!
//! Exit codes: 0 on success, 1 for I/O and file-format failures, 2 for usage
//! and validation failures. The worker count is read from
//! [`THREADS_ENV`]; it changes speed only, never results.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::{Error, Result};
use crate::imaging::{
    self, add_noise, add_noise_grid, compare_norms, example_field, make_mask, peaks_field, spatial_filter_grid,
    FilterKind, Image, NoiseKind, NoiseSpec, TestFunction,
};
use crate::io::{load_pgm, quantize_image, save_pgm, table_to_bytes, PgmFormat};
use crate::kernels::DensityKernel;
use crate::metrics::QualityReport;
use crate::normspaces::{mixed_lebesgue_error, mixed_orlicz_modular, sup_error, MixedExponents, OrliczVector};
use crate::operator::{kantorovich_apply_grid, BoxDomain, GridFunction, DEFAULT_SUBSAMPLES};

/// Environment variable holding the worker-thread count.
pub const THREADS_ENV: &str = "KANTOROVICH_THREADS";

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "kantorovich", version, about = "Kantorovich-type neural network operators: approximation, error tables and image pipelines")]
pub struct RunConfig {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Approximation errors of K_n f for an analytic test function.
    Approx(ApproxArgs),
    /// Operator-based image pipelines.
    Image {
        #[command(subcommand)]
        task: ImageTask,
    },
    /// Diagonal vs mixed-exponent errors of a classically denoised signal.
    CompareNorms(CompareArgs),
}

#[derive(Debug, Args)]
pub struct ApproxArgs {
    /// Test function: example1 or example2.
    #[arg(long, default_value = "example1")]
    pub function: String,
    /// logistic, tanh, ramp or bspline:<order>.
    #[arg(long, default_value = "tanh")]
    pub kernel: String,
    /// Comma-separated operator orders.
    #[arg(long, default_value = "10,20,30,40")]
    pub n: String,
    /// Subsamples per cell axis.
    #[arg(long, default_value_t = DEFAULT_SUBSAMPLES)]
    pub m: usize,
    /// Evaluation grid size per axis.
    #[arg(long, default_value_t = 128)]
    pub grid: usize,
    /// Semicolon-separated exponent tuples, e.g. "2,3;4,6".
    #[arg(long)]
    pub norms: Option<String>,
    /// Orlicz functions, one per axis, e.g. "exp:2,log:2:1.7".
    #[arg(long)]
    pub orlicz: Option<String>,
    /// Modular scale factor.
    #[arg(long, default_value_t = 1.0)]
    pub lambda: f64,
    /// Output CSV; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ImageCommon {
    /// Input PGM.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, default_value = "tanh")]
    pub kernel: String,
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = DEFAULT_SUBSAMPLES)]
    pub m: usize,
    /// Output PGM.
    #[arg(long)]
    pub out: PathBuf,
    /// Quality report CSV; stdout when absent.
    #[arg(long)]
    pub metrics_out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = FormatArg::P5)]
    pub format: FormatArg,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum FormatArg {
    P2,
    P5,
}

impl From<FormatArg> for PgmFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::P2 => PgmFormat::P2,
            FormatArg::P5 => PgmFormat::P5,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum ImageTask {
    /// Reconstruct the image on its own pixel grid.
    Reconstruct(ImageCommon),
    /// Remove a seeded random fraction of pixels and fill them back in.
    Inpaint {
        #[command(flatten)]
        common: ImageCommon,
        #[arg(long, default_value_t = 0.21)]
        mask_fraction: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Upscale by an integer factor; quality is measured after downsampling back.
    Scale {
        #[command(flatten)]
        common: ImageCommon,
        #[arg(long, default_value_t = 2)]
        factor: usize,
        /// Optional PGM for the re-downsampled image.
        #[arg(long)]
        down_out: Option<PathBuf>,
    },
    /// Add seeded noise and smooth it with the operator.
    Denoise {
        #[command(flatten)]
        common: ImageCommon,
        /// impulse:<d>, salt_pepper:<d> or gaussian:<sigma>.
        #[arg(long, default_value = "impulse:0.05")]
        noise: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Optional PGM for the noisy image.
        #[arg(long)]
        noisy_out: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Source {
    Peaks,
    Image,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[arg(long, value_enum, default_value_t = Source::Peaks)]
    pub source: Source,
    /// Input PGM for --source image.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Peaks grid size.
    #[arg(long, default_value_t = 148)]
    pub grid: usize,
    /// Default gaussian:0.3 for peaks, salt_pepper:0.05 for images.
    #[arg(long)]
    pub noise: Option<String>,
    /// Default gaussian:1 for peaks, median:3 for images.
    #[arg(long)]
    pub filter: Option<String>,
    /// Comma-separated diagonal exponents.
    #[arg(long, default_value = "2,3,4,5,6,7,8")]
    pub p1: String,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Parses arguments, runs the command and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let config = match RunConfig::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    if let Err(e) = configure_threads() {
        eprintln!("error: {e}");
        return EXIT_USAGE;
    }
    match execute(&config) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Io(_) | Error::Csv(_) | Error::Parse { .. } => EXIT_IO,
        _ => EXIT_USAGE,
    }
}

fn configure_threads() -> Result<()> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let threads: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&t| t > 0)
        .ok_or_else(|| Error::config(format!("{THREADS_ENV} must be a positive integer, got `{raw}`")))?;
    // a pool may already exist when called repeatedly in one process
    let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    Ok(())
}

pub fn execute(config: &RunConfig) -> Result<()> {
    match &config.command {
        Command::Approx(a) => cmd_approx(a),
        Command::Image { task } => cmd_image(task),
        Command::CompareNorms(a) => cmd_compare_norms(a),
    }
}

fn parse_list<T: std::str::FromStr>(s: &str, what: &str) -> Result<Vec<T>> {
    let items = s
        .split(',')
        .map(|t| t.trim().parse::<T>().map_err(|_| Error::config(format!("bad {what} `{t}` in `{s}`"))))
        .collect::<Result<Vec<T>>>()?;
    if items.is_empty() {
        return Err(Error::config(format!("empty {what} list")));
    }
    Ok(items)
}

fn emit_table(out: Option<&Path>, header: &[&str], rows: &[Vec<f64>]) -> Result<()> {
    let bytes = table_to_bytes(header, rows)?;
    match out {
        Some(path) => std::fs::write(path, bytes)?,
        None => std::io::stdout().write_all(&bytes)?,
    }
    Ok(())
}

pub fn cmd_approx(a: &ApproxArgs) -> Result<()> {
    let which: TestFunction = a.function.parse()?;
    let kernel: DensityKernel = a.kernel.parse()?;
    let orders: Vec<usize> = parse_list(&a.n, "operator order")?;
    if orders.contains(&0) || a.m == 0 {
        return Err(Error::arg("n and m must be at least 1"));
    }
    if a.grid < 2 {
        return Err(Error::arg("grid needs at least 2 nodes per axis"));
    }
    let norms: Vec<MixedExponents> = match &a.norms {
        Some(s) => s.split(';').map(str::parse).collect::<Result<_>>()?,
        None => Vec::new(),
    };
    for p in &norms {
        if p.dim() != 2 {
            return Err(Error::arg(format!("exponent tuple `{p}` must have 2 entries")));
        }
        if p.is_decreasing_somewhere() {
            eprintln!("warning: exponent tuple ({p}) is decreasing");
        }
    }
    let orlicz: Option<OrliczVector> = a.orlicz.as_deref().map(str::parse).transpose()?;
    if orlicz.as_ref().is_some_and(|o| o.dim() != 2) {
        return Err(Error::arg("the Orlicz vector needs one function per axis (2)"));
    }
    if !(a.lambda > 0.0 && a.lambda.is_finite()) {
        return Err(Error::arg(format!("lambda must be positive, got {}", a.lambda)));
    }

    let field = example_field(which);
    let shape = vec![a.grid, a.grid];
    let truth = GridFunction::from_fn(BoxDomain::unit(2), shape.clone(), |u| which.eval(u[0], u[1]))?;

    let mut header = vec!["n".to_string(), "sup_error".to_string()];
    header.extend(norms.iter().map(|p| format!("L({p})_error")));
    if orlicz.is_some() {
        header.push("modular_error".into());
    }
    let mut rows = Vec::with_capacity(orders.len());
    for &n in &orders {
        let approx = kantorovich_apply_grid(&field, &kernel, n, a.m, &shape)?;
        let mut row = vec![n as f64, sup_error(&approx, &truth)?];
        for p in &norms {
            row.push(mixed_lebesgue_error(&approx, &truth, p)?);
        }
        if let Some(phi) = &orlicz {
            let diff = approx.zip_with(&truth, |x, y| x - y)?;
            let m = mixed_orlicz_modular(&diff, phi, a.lambda)?;
            if m.saturated {
                eprintln!("warning: modular saturated at n = {n}");
            }
            row.push(m.value);
        }
        rows.push(row);
    }
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    emit_table(a.out.as_deref(), &header, &rows)
}

const REPORT_HEADER: [&str; 4] = ["n", "mse", "psnr_db", "ssim"];

fn report_row(n: usize, r: &QualityReport) -> Vec<f64> {
    let [mse, psnr, ssim] = r.values();
    vec![n as f64, mse, psnr, ssim]
}

pub fn cmd_image(task: &ImageTask) -> Result<()> {
    let common = match task {
        ImageTask::Reconstruct(c) => c,
        ImageTask::Inpaint { common, .. } | ImageTask::Scale { common, .. } | ImageTask::Denoise { common, .. } => {
            common
        }
    };
    let kernel: DensityKernel = common.kernel.parse()?;
    if common.n == 0 || common.m == 0 {
        return Err(Error::arg("n and m must be at least 1"));
    }
    // validate task parameters before touching the file system
    let noise = match task {
        ImageTask::Denoise { noise, seed, .. } => Some(NoiseSpec::new(noise.parse()?, *seed)?),
        ImageTask::Inpaint { mask_fraction, .. } if !(0.0..=1.0).contains(mask_fraction) => {
            return Err(Error::arg(format!("mask fraction must lie in [0, 1], got {mask_fraction}")));
        }
        ImageTask::Scale { factor: 0, .. } => return Err(Error::arg("scale factor must be at least 1")),
        _ => None,
    };

    let clean = load_pgm(&common.input)?;
    let (n, m) = (common.n, common.m);
    let format = PgmFormat::from(common.format);
    // metrics describe the 8-bit images actually written
    let (output, report) = match task {
        ImageTask::Reconstruct(_) => {
            let out = quantize_image(&imaging::reconstruct(&clean, &kernel, n, m)?)?;
            let report = QualityReport::compare(&clean, &out)?;
            (out, report)
        }
        ImageTask::Inpaint { mask_fraction, seed, .. } => {
            let mask = make_mask(clean.height(), clean.width(), *mask_fraction, *seed)?;
            let out = quantize_image(&imaging::inpaint(&clean.clone().with_mask(mask)?, &kernel, n, m)?)?;
            let report = QualityReport::compare(&clean, &out)?;
            (out, report)
        }
        ImageTask::Scale { factor, down_out, .. } => {
            let (up, down) = imaging::scale_roundtrip(&clean, &kernel, n, m, *factor)?;
            let down = quantize_image(&down)?;
            if let Some(path) = down_out {
                save_pgm(&down, path, format)?;
            }
            let report = QualityReport::compare(&clean, &down)?;
            (up, report)
        }
        ImageTask::Denoise { noisy_out, .. } => {
            let noisy = add_noise(&clean, noise.expect("validated above"))?;
            if let Some(path) = noisy_out {
                save_pgm(&noisy, path, format)?;
            }
            let noisy_report = QualityReport::compare(&clean, &noisy)?;
            eprintln!("noisy image: psnr_db {:.4}, ssim {:.4}", noisy_report.psnr_db, noisy_report.ssim);
            let out = quantize_image(&imaging::denoise(&noisy, &kernel, n, m)?)?;
            let report = QualityReport::compare(&clean, &out)?;
            (out, report)
        }
    };
    save_pgm(&output, &common.out, format)?;
    emit_table(common.metrics_out.as_deref(), &REPORT_HEADER, &[report_row(n, &report)])
}

pub fn cmd_compare_norms(a: &CompareArgs) -> Result<()> {
    let (default_noise, default_filter) = match a.source {
        Source::Peaks => ("gaussian:0.3", "gaussian:1"),
        Source::Image => ("salt_pepper:0.05", "median:3"),
    };
    let noise: NoiseKind = a.noise.as_deref().unwrap_or(default_noise).parse()?;
    let filter: FilterKind = a.filter.as_deref().unwrap_or(default_filter).parse()?;
    let p1: Vec<f64> = parse_list(&a.p1, "exponent")?;
    if let Some(bad) = p1.iter().find(|&&p| !(p >= 1.0 && p.is_finite())) {
        return Err(Error::arg(format!("exponents must be >= 1, got {bad}")));
    }
    let spec = NoiseSpec::new(noise, a.seed)?;

    let (clean, noisy) = match a.source {
        Source::Peaks => {
            let clean = peaks_field(a.grid)?;
            let noisy = add_noise_grid(&clean, spec)?;
            (clean, noisy)
        }
        Source::Image => {
            let path = a.input.as_ref().ok_or_else(|| Error::arg("--source image requires --input"))?;
            let img: Image = load_pgm(path)?;
            let noisy = add_noise(&img, spec)?;
            (img.to_grid(), noisy.to_grid())
        }
    };
    let restored = spatial_filter_grid(&noisy, filter)?;
    let rows: Vec<Vec<f64>> = compare_norms(&clean, &restored, &p1)?
        .iter()
        .map(|r| vec![r.p1, r.diagonal, r.plus_one, r.plus_two])
        .collect();
    emit_table(a.out.as_deref(), &["p1", "L(p1,p1)", "L(p1,p1+1)", "L(p1,p1+2)"], &rows)
}
