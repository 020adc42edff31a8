//! Grayscale images and the operator-based pipelines: reconstruction,
//! inpainting, scaling and denoising, plus noise models, classical filters
//! and the analytic test fields.
//!
//! An image of `height × width` pixels is viewed as a step function on
//! `[0, 1]²` with `u₁` running along columns and `u₂` along rows. On the grid
//! side this is a [`GridFunction`] of shape `[width, height]`.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::kernels::DensityKernel;
use crate::normspaces::{mixed_lebesgue_norm, MixedExponents};
use crate::operator::{cell_averages, kantorovich_grid, masked_cell_averages, BoxDomain, Field, GridFunction};

/// Slack allowed outside `[0, 1]` before outputs are min-max stretched.
pub const RANGE_SLACK: f64 = 1e-12;

/// Grayscale image with pixels in `[0, 1]`, row-major, and an optional
/// validity mask (`true` = known pixel).
#[derive(Debug, Clone, PartialEq)]
pub struct Image {
    height: usize,
    width: usize,
    pixels: Vec<f64>,
    mask: Option<Vec<bool>>,
}

impl Image {
    pub fn new(height: usize, width: usize, pixels: Vec<f64>) -> Result<Self> {
        if height == 0 || width == 0 {
            return Err(Error::arg(format!("image must be non-empty, got {height}x{width}")));
        }
        if pixels.len() != height * width {
            return Err(Error::arg(format!(
                "{height}x{width} image needs {} pixels, got {}",
                height * width,
                pixels.len()
            )));
        }
        if let Some(bad) = pixels.iter().find(|p| !(0.0..=1.0).contains(*p)) {
            return Err(Error::arg(format!("pixel value {bad} outside [0, 1]")));
        }
        Ok(Image { height, width, pixels, mask: None })
    }

    pub fn constant(height: usize, width: usize, value: f64) -> Result<Self> {
        Image::new(height, width, vec![value; height * width])
    }

    /// Pixel `(row, col)` set to `f(row, col)`.
    pub fn from_fn(height: usize, width: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        let pixels = (0..height * width).map(|i| f(i / width, i % width)).collect();
        Image::new(height, width, pixels)
    }

    /// Attaches a validity mask (`true` = known pixel).
    pub fn with_mask(mut self, mask: Vec<bool>) -> Result<Self> {
        if mask.len() != self.pixels.len() {
            return Err(Error::arg(format!("mask has {} entries for {} pixels", mask.len(), self.pixels.len())));
        }
        self.mask = Some(mask);
        Ok(self)
    }

    pub fn without_mask(mut self) -> Self {
        self.mask = None;
        self
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn pixels(&self) -> &[f64] {
        &self.pixels
    }

    pub fn mask(&self) -> Option<&[bool]> {
        self.mask.as_deref()
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.pixels[row * self.width + col]
    }

    /// The pixels as a grid function on `[0, 1]²`, shape `[width, height]`.
    pub fn to_grid(&self) -> GridFunction {
        GridFunction::new(BoxDomain::unit(2), vec![self.width, self.height], self.pixels.clone())
            .expect("image pixels are finite")
    }

    /// Inverse of [`Image::to_grid`]; values must already lie in `[0, 1]`.
    pub fn from_grid(g: &GridFunction) -> Result<Self> {
        if g.dim() != 2 {
            return Err(Error::arg(format!("images are 2-D, grid has {} axes", g.dim())));
        }
        Image::new(g.shape()[1], g.shape()[0], g.values().to_vec())
    }

    fn require_unmasked(&self, what: &str) -> Result<()> {
        if self.mask.is_some() {
            return Err(Error::arg(format!("{what} expects an unmasked image")));
        }
        Ok(())
    }
}

/// Index rule mapping a canonical coordinate to a pixel on an `N`-pixel axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PixelAccess {
    /// `min(⌊u (N−1)⌋, N−1)`
    Floor,
    /// `round(u (N−1))`
    Nearest,
}

impl PixelAccess {
    fn index(self, u: f64, len: usize) -> usize {
        let t = u.clamp(0.0, 1.0) * (len - 1) as f64;
        let i = match self {
            PixelAccess::Floor => t.floor(),
            PixelAccess::Nearest => t.round(),
        };
        (i as usize).min(len - 1)
    }
}

/// Step-function view of an image on `[0, 1]²`; masked pixels read as NaN.
pub struct ImageField<'a> {
    img: &'a Image,
    access: PixelAccess,
    domain: BoxDomain,
}

impl<'a> ImageField<'a> {
    pub fn new(img: &'a Image, access: PixelAccess) -> Self {
        ImageField { img, access, domain: BoxDomain::unit(2) }
    }
}

impl Field for ImageField<'_> {
    fn domain(&self) -> &BoxDomain {
        &self.domain
    }

    fn eval(&self, x: &[f64]) -> f64 {
        let col = self.access.index(x[0], self.img.width);
        let row = self.access.index(x[1], self.img.height);
        let i = row * self.img.width + col;
        match &self.img.mask {
            Some(mask) if !mask[i] => f64::NAN,
            _ => self.img.pixels[i],
        }
    }
}

/// Affine min-max stretch to `[0, 1]`, applied only when `values` leave the
/// interval by more than [`RANGE_SLACK`]; otherwise a clamp.
pub fn renormalize(mut values: Vec<f64>) -> Vec<f64> {
    let (lo, hi) = values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    if (lo < -RANGE_SLACK || hi > 1.0 + RANGE_SLACK) && hi > lo {
        values.iter_mut().for_each(|v| *v = (*v - lo) / (hi - lo));
        return values;
    }
    values.iter_mut().for_each(|v| *v = v.clamp(0.0, 1.0));
    values
}

/// `K_n` of the image's step function sampled on an `out_h × out_w` grid.
fn operator_on_image(
    img: &Image,
    kernel: &DensityKernel,
    n: usize,
    m: usize,
    access: PixelAccess,
    out_h: usize,
    out_w: usize,
) -> Result<Vec<f64>> {
    let field = ImageField::new(img, access);
    let coeffs = if img.mask.is_some() {
        masked_cell_averages(&field, n, m)?
    } else {
        cell_averages(&field, n, m)?
    };
    Ok(kantorovich_grid(&coeffs, kernel, &[out_w, out_h])?.into_values())
}

/// Operator reconstruction of an image on its own pixel grid.
pub fn reconstruct(img: &Image, kernel: &DensityKernel, n: usize, m: usize) -> Result<Image> {
    img.require_unmasked("reconstruct")?;
    let raw = operator_on_image(img, kernel, n, m, PixelAccess::Floor, img.height, img.width)?;
    Image::new(img.height, img.width, renormalize(raw))
}

/// Operator smoothing of a noisy image; same computation as [`reconstruct`].
pub fn denoise(noisy: &Image, kernel: &DensityKernel, n: usize, m: usize) -> Result<Image> {
    reconstruct(noisy, kernel, n, m)
}

/// Number of pixels selected by a density: `round(fraction · len)`.
pub fn exact_count(fraction: f64, len: usize) -> usize {
    ((fraction * len as f64).round() as usize).min(len)
}

fn check_fraction(fraction: f64, what: &str) -> Result<()> {
    if !(0.0..=1.0).contains(&fraction) {
        return Err(Error::arg(format!("{what} must lie in [0, 1], got {fraction}")));
    }
    Ok(())
}

/// Sorted indices of `count` pixels out of `len`, from a seeded Fisher–Yates shuffle.
fn choose_pixels(len: usize, count: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..len).collect();
    idx.shuffle(rng);
    idx.truncate(count);
    idx.sort_unstable();
    idx
}

/// Validity mask with exactly `round(fraction · height · width)` missing pixels.
pub fn make_mask(height: usize, width: usize, fraction: f64, seed: u64) -> Result<Vec<bool>> {
    check_fraction(fraction, "mask fraction")?;
    let len = height * width;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut mask = vec![true; len];
    for i in choose_pixels(len, exact_count(fraction, len), &mut rng) {
        mask[i] = false;
    }
    Ok(mask)
}

/// Fills masked pixels with the operator built from the known pixels only.
/// Known pixels are copied through unchanged.
pub fn inpaint(img: &Image, kernel: &DensityKernel, n: usize, m: usize) -> Result<Image> {
    let Some(mask) = img.mask() else {
        return Ok(img.clone());
    };
    if !mask.iter().any(|&v| v) {
        return Err(Error::UnrecoverableMask);
    }
    if mask.iter().all(|&v| v) {
        return Ok(img.clone().without_mask());
    }
    let raw = operator_on_image(img, kernel, n, m, PixelAccess::Floor, img.height, img.width)?;
    let pixels = img
        .pixels
        .iter()
        .zip(mask)
        .zip(raw)
        .map(|((&p, &known), est)| if known { p } else { est.clamp(0.0, 1.0) })
        .collect();
    Image::new(img.height, img.width, pixels)
}

/// Operator evaluated on a grid `factor` times finer along each axis.
pub fn upscale(img: &Image, kernel: &DensityKernel, n: usize, m: usize, factor: usize) -> Result<Image> {
    img.require_unmasked("upscale")?;
    if factor == 0 {
        return Err(Error::arg("scale factor must be at least 1"));
    }
    let (h, w) = (img.height * factor, img.width * factor);
    let raw = operator_on_image(img, kernel, n, m, PixelAccess::Nearest, h, w)?;
    Image::new(h, w, renormalize(raw))
}

/// Keeps rows and columns `factor−1, 2·factor−1, …`.
pub fn downsample(img: &Image, factor: usize) -> Result<Image> {
    img.require_unmasked("downsample")?;
    if factor == 0 || factor > img.height || factor > img.width {
        return Err(Error::arg(format!(
            "downsample factor {factor} invalid for a {}x{} image",
            img.height, img.width
        )));
    }
    let (h, w) = (img.height / factor, img.width / factor);
    Image::from_fn(h, w, |r, c| img.get((r + 1) * factor - 1, (c + 1) * factor - 1))
}

/// Upscale followed by downsampling with the same factor; returns both.
pub fn scale_roundtrip(
    img: &Image,
    kernel: &DensityKernel,
    n: usize,
    m: usize,
    factor: usize,
) -> Result<(Image, Image)> {
    let up = upscale(img, kernel, n, m, factor)?;
    let down = downsample(&up, factor)?;
    Ok((up, down))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NoiseKind {
    /// Exactly `round(d · N)` random pixels set to 1.
    ImpulseWhite(f64),
    /// Exactly `round(d · N)` random pixels set to 0 or 1 with equal odds.
    SaltPepper(f64),
    /// Additive `N(0, σ²)`.
    Gaussian(f64),
}

impl NoiseKind {
    pub fn validate(self) -> Result<Self> {
        match self {
            NoiseKind::ImpulseWhite(d) | NoiseKind::SaltPepper(d) => check_fraction(d, "noise density")?,
            NoiseKind::Gaussian(s) => {
                if !(s >= 0.0 && s.is_finite()) {
                    return Err(Error::arg(format!("noise sigma must be >= 0, got {s}")));
                }
            }
        }
        Ok(self)
    }

    /// Applies the noise in place. Values are not clamped.
    fn apply(self, values: &mut [f64], seed: u64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        match self {
            NoiseKind::ImpulseWhite(d) => {
                for i in choose_pixels(values.len(), exact_count(d, values.len()), &mut rng) {
                    values[i] = 1.0;
                }
            }
            NoiseKind::SaltPepper(d) => {
                for i in choose_pixels(values.len(), exact_count(d, values.len()), &mut rng) {
                    values[i] = if rng.random::<bool>() { 1.0 } else { 0.0 };
                }
            }
            NoiseKind::Gaussian(sigma) => {
                if sigma > 0.0 {
                    for v in values.iter_mut() {
                        *v += sigma * rng.sample::<f64, _>(StandardNormal);
                    }
                }
            }
        }
    }
}

impl fmt::Display for NoiseKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NoiseKind::ImpulseWhite(d) => write!(f, "impulse:{d}"),
            NoiseKind::SaltPepper(d) => write!(f, "salt_pepper:{d}"),
            NoiseKind::Gaussian(s) => write!(f, "gaussian:{s}"),
        }
    }
}

impl FromStr for NoiseKind {
    type Err = Error;

    /// `impulse:<d>`, `salt_pepper:<d>` or `gaussian:<sigma>`.
    fn from_str(s: &str) -> Result<Self> {
        let (name, value) = s
            .split_once(':')
            .ok_or_else(|| Error::config(format!("noise token `{s}` needs the form kind:value")))?;
        let v: f64 = value
            .parse()
            .map_err(|_| Error::config(format!("bad number in noise token `{s}`")))?;
        let kind = match name {
            "impulse" => NoiseKind::ImpulseWhite(v),
            "salt_pepper" | "saltpepper" => NoiseKind::SaltPepper(v),
            "gaussian" => NoiseKind::Gaussian(v),
            _ => return Err(Error::config(format!("unknown noise kind `{name}`"))),
        };
        kind.validate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec {
    pub kind: NoiseKind,
    pub seed: u64,
}

impl NoiseSpec {
    pub fn new(kind: NoiseKind, seed: u64) -> Result<Self> {
        Ok(NoiseSpec { kind: kind.validate()?, seed })
    }
}

/// Seeded noise on an image; Gaussian noise is clamped back to `[0, 1]`.
pub fn add_noise(img: &Image, spec: NoiseSpec) -> Result<Image> {
    img.require_unmasked("add_noise")?;
    spec.kind.validate()?;
    let mut values = img.pixels.clone();
    spec.kind.apply(&mut values, spec.seed);
    values.iter_mut().for_each(|v| *v = v.clamp(0.0, 1.0));
    Image::new(img.height, img.width, values)
}

/// Seeded noise on grid samples, without clamping.
pub fn add_noise_grid(g: &GridFunction, spec: NoiseSpec) -> Result<GridFunction> {
    spec.kind.validate()?;
    let mut values = g.values().to_vec();
    spec.kind.apply(&mut values, spec.seed);
    GridFunction::new(g.domain().clone(), g.shape().to_vec(), values)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FilterKind {
    /// Separable Gaussian, truncated at radius `⌈3σ⌉`.
    Gaussian(f64),
    /// Square median window of odd side.
    Median(usize),
}

impl FilterKind {
    pub fn validate(self) -> Result<Self> {
        match self {
            FilterKind::Gaussian(s) if !(s > 0.0 && s.is_finite()) => {
                Err(Error::arg(format!("Gaussian filter sigma must be positive, got {s}")))
            }
            FilterKind::Median(w) if w < 3 || w % 2 == 0 => {
                Err(Error::arg(format!("median window must be odd and >= 3, got {w}")))
            }
            _ => Ok(self),
        }
    }
}

impl fmt::Display for FilterKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FilterKind::Gaussian(s) => write!(f, "gaussian:{s}"),
            FilterKind::Median(w) => write!(f, "median:{w}"),
        }
    }
}

impl FromStr for FilterKind {
    type Err = Error;

    /// `gaussian:<sigma>` or `median:<window>`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::config(format!("bad filter token `{s}`"));
        let (name, value) = s.split_once(':').ok_or_else(bad)?;
        let kind = match name {
            "gaussian" => FilterKind::Gaussian(value.parse().map_err(|_| bad())?),
            "median" => FilterKind::Median(value.parse().map_err(|_| bad())?),
            _ => return Err(bad()),
        };
        kind.validate()
    }
}

fn gaussian_weights(sigma: f64) -> Vec<f64> {
    let radius = (3.0 * sigma).ceil() as i64;
    let w: Vec<f64> = (-radius..=radius)
        .map(|i| (-(i * i) as f64 / (2.0 * sigma * sigma)).exp())
        .collect();
    let total: f64 = w.iter().sum();
    w.into_iter().map(|v| v / total).collect()
}

fn clamp_index(i: i64, len: usize) -> usize {
    i.clamp(0, len as i64 - 1) as usize
}

/// Filters a `rows × cols` plane stored row-major, replicate padding.
fn filter_plane(values: &[f64], rows: usize, cols: usize, kind: FilterKind) -> Vec<f64> {
    match kind {
        FilterKind::Gaussian(sigma) => {
            let w = gaussian_weights(sigma);
            let radius = (w.len() / 2) as i64;
            let mut horizontal = vec![0.0; values.len()];
            for r in 0..rows {
                for c in 0..cols {
                    horizontal[r * cols + c] = w
                        .iter()
                        .enumerate()
                        .map(|(j, wj)| wj * values[r * cols + clamp_index(c as i64 + j as i64 - radius, cols)])
                        .sum();
                }
            }
            let mut out = vec![0.0; values.len()];
            for r in 0..rows {
                for c in 0..cols {
                    out[r * cols + c] = w
                        .iter()
                        .enumerate()
                        .map(|(j, wj)| wj * horizontal[clamp_index(r as i64 + j as i64 - radius, rows) * cols + c])
                        .sum();
                }
            }
            out
        }
        FilterKind::Median(window) => {
            let half = (window / 2) as i64;
            let mut buf = Vec::with_capacity(window * window);
            let mut out = vec![0.0; values.len()];
            for r in 0..rows {
                for c in 0..cols {
                    buf.clear();
                    for dr in -half..=half {
                        let rr = clamp_index(r as i64 + dr, rows);
                        for dc in -half..=half {
                            buf.push(values[rr * cols + clamp_index(c as i64 + dc, cols)]);
                        }
                    }
                    let mid = buf.len() / 2;
                    let (_, median, _) = buf.select_nth_unstable_by(mid, f64::total_cmp);
                    out[r * cols + c] = *median;
                }
            }
            out
        }
    }
}

pub fn spatial_filter_image(img: &Image, kind: FilterKind) -> Result<Image> {
    img.require_unmasked("spatial_filter")?;
    let kind = kind.validate()?;
    let out = filter_plane(&img.pixels, img.height, img.width, kind);
    Image::new(img.height, img.width, out.into_iter().map(|v| v.clamp(0.0, 1.0)).collect())
}

/// Filters a 2-D grid in index space (axis 1 runs along rows of the plane).
pub fn spatial_filter_grid(g: &GridFunction, kind: FilterKind) -> Result<GridFunction> {
    if g.dim() != 2 {
        return Err(Error::arg(format!("spatial filters need a 2-D grid, got {} axes", g.dim())));
    }
    let kind = kind.validate()?;
    let out = filter_plane(g.values(), g.shape()[1], g.shape()[0], kind);
    GridFunction::new(g.domain().clone(), g.shape().to_vec(), out)
}

/// The `peaks` test surface.
pub fn peaks(x: f64, y: f64) -> f64 {
    3.0 * (1.0 - x).powi(2) * (-x * x - (y + 1.0).powi(2)).exp()
        - 10.0 * (x / 5.0 - x.powi(3) - y.powi(5)) * (-x * x - y * y).exp()
        - (-(x + 1.0).powi(2) - y * y).exp() / 3.0
}

/// `peaks` on a `grid × grid` node grid over `[−3, 3]²`.
pub fn peaks_field(grid: usize) -> Result<GridFunction> {
    if grid < 2 {
        return Err(Error::arg(format!("peaks grid needs at least 2 nodes, got {grid}")));
    }
    GridFunction::from_fn(BoxDomain::cube(2, -3.0, 3.0)?, vec![grid, grid], |p| peaks(p[0], p[1]))
}

/// Analytic test functions on `[0, 1]²`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TestFunction {
    /// Two Gaussian bumps centred at `(0.3, 0.5)` and `(0.7, 0.5)`.
    Example1,
    /// Damped radial wave `sin(15 r) / (1 + 10 r)` around the centre.
    Example2,
}

impl TestFunction {
    pub fn eval(self, u1: f64, u2: f64) -> f64 {
        match self {
            TestFunction::Example1 => {
                (-70.0 * ((u1 - 0.3).powi(2) + (u2 - 0.5).powi(2))).exp()
                    + (-70.0 * ((u1 - 0.7).powi(2) + (u2 - 0.5).powi(2))).exp()
            }
            TestFunction::Example2 => {
                let r = (u1 - 0.5).hypot(u2 - 0.5);
                (15.0 * r).sin() / (1.0 + 10.0 * r)
            }
        }
    }
}

impl fmt::Display for TestFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TestFunction::Example1 => "example1",
            TestFunction::Example2 => "example2",
        })
    }
}

impl FromStr for TestFunction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "example1" => Ok(TestFunction::Example1),
            "example2" => Ok(TestFunction::Example2),
            _ => Err(Error::config(format!("unknown test function `{s}` (expected example1 or example2)"))),
        }
    }
}

/// A [`TestFunction`] as a [`Field`] on `[0, 1]²`.
pub struct ExampleField {
    which: TestFunction,
    domain: BoxDomain,
}

pub fn example_field(which: TestFunction) -> ExampleField {
    ExampleField { which, domain: BoxDomain::unit(2) }
}

impl Field for ExampleField {
    fn domain(&self) -> &BoxDomain {
        &self.domain
    }

    fn eval(&self, x: &[f64]) -> f64 {
        self.which.eval(x[0], x[1])
    }
}

/// One row of the diagonal vs mixed exponent comparison.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormComparisonRow {
    pub p1: f64,
    /// `L^{(p1, p1)}`
    pub diagonal: f64,
    /// `L^{(p1, p1 + 1)}`
    pub plus_one: f64,
    /// `L^{(p1, p1 + 2)}`
    pub plus_two: f64,
}

/// Mixed-norm errors of `restored − clean` measured in pixel units
/// (every sample has unit cell measure).
pub fn compare_norms(clean: &GridFunction, restored: &GridFunction, p1_list: &[f64]) -> Result<Vec<NormComparisonRow>> {
    let diff = restored.zip_with(clean, |a, b| a - b)?;
    let pixel_box = BoxDomain::new(vec![0.0; diff.dim()], diff.shape().iter().map(|&s| s as f64).collect())?;
    let diff = diff.with_domain(pixel_box)?;
    let r = diff.dim();
    let norm = |p1: f64, p2: f64| {
        let mut p = vec![p1; r];
        p[r - 1] = p2;
        mixed_lebesgue_norm(&diff, &MixedExponents::new(p)?)
    };
    p1_list
        .iter()
        .map(|&p1| {
            Ok(NormComparisonRow {
                p1,
                diagonal: norm(p1, p1)?,
                plus_one: norm(p1, p1 + 1.0)?,
                plus_two: norm(p1, p1 + 2.0)?,
            })
        })
        .collect()
}
