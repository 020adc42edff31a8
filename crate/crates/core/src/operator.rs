//! Kantorovich coefficients and evaluation of the operator
//!
//! ```text
//! K_n(f, x) = Σ_k A_k Ψ(nx − k) / Σ_k Ψ(nx − k),    k ∈ [−n, n−1]^r,
//! A_k       = n^r ∫_{I_{k,n}} f,                   I_{k,n} = Π [k_i/n, (k_i+1)/n].
//! ```
//!
//! The operator works in canonical coordinates: the user's box is mapped
//! affinely onto `[0, 1]^r`. Cells reaching outside the box sample `f` at the
//! clamped coordinate.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::kernels::DensityKernel;

/// Kernel sums below this are rejected as degenerate.
pub const MIN_KERNEL_SUM: f64 = 1e-300;

/// Default number of midpoint subsamples per cell axis.
pub const DEFAULT_SUBSAMPLES: usize = 4;

/// Axis-aligned box `Π [lower_i, upper_i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxDomain {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl BoxDomain {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.is_empty() || lower.len() != upper.len() {
            return Err(Error::arg(format!(
                "box bounds must be non-empty and of equal length ({} vs {})",
                lower.len(),
                upper.len()
            )));
        }
        for (i, (lo, hi)) in lower.iter().zip(&upper).enumerate() {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(Error::arg(format!("axis {}: need lower < upper, got [{lo}, {hi}]", i + 1)));
            }
        }
        Ok(BoxDomain { lower, upper })
    }

    /// `[0, 1]^r`
    pub fn unit(r: usize) -> Self {
        BoxDomain { lower: vec![0.0; r], upper: vec![1.0; r] }
    }

    /// `[-1, 1]^r`
    pub fn symmetric(r: usize) -> Self {
        BoxDomain { lower: vec![-1.0; r], upper: vec![1.0; r] }
    }

    /// `[lo, hi]^r`
    pub fn cube(r: usize, lo: f64, hi: f64) -> Result<Self> {
        BoxDomain::new(vec![lo; r], vec![hi; r])
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn width(&self, axis: usize) -> f64 {
        self.upper[axis] - self.lower[axis]
    }

    pub fn to_canonical(&self, axis: usize, x: f64) -> f64 {
        (x - self.lower[axis]) / self.width(axis)
    }

    pub fn from_canonical(&self, axis: usize, u: f64) -> f64 {
        self.lower[axis] + u * self.width(axis)
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim()
            && x.iter().enumerate().all(|(a, &v)| {
                let tol = 1e-12 * self.width(a).max(1.0);
                v >= self.lower[a] - tol && v <= self.upper[a] + tol
            })
    }
}

/// A scalar field that can be sampled anywhere on its domain.
pub trait Field: Sync {
    fn domain(&self) -> &BoxDomain;

    /// Value at `x` (domain coordinates, `x.len() == domain().dim()`).
    fn eval(&self, x: &[f64]) -> f64;
}

/// Closure-backed [`Field`].
pub struct FnField<F> {
    domain: BoxDomain,
    f: F,
}

impl<F> FnField<F>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    pub fn new(domain: BoxDomain, f: F) -> Self {
        FnField { domain, f }
    }
}

impl<F> Field for FnField<F>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    fn domain(&self) -> &BoxDomain {
        &self.domain
    }

    fn eval(&self, x: &[f64]) -> f64 {
        (self.f)(x)
    }
}

/// Samples of a scalar field on the endpoint-inclusive uniform grid of a box.
///
/// Axis 1 is the innermost (fastest varying) axis of `values`. For images this
/// means `shape = [width, height]` and `values` is the usual row-major raster.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    domain: BoxDomain,
    shape: Vec<usize>,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn new(domain: BoxDomain, shape: Vec<usize>, values: Vec<f64>) -> Result<Self> {
        if shape.len() != domain.dim() {
            return Err(Error::arg(format!(
                "shape has {} axes but the domain has {}",
                shape.len(),
                domain.dim()
            )));
        }
        if shape.contains(&0) {
            return Err(Error::arg("grid axes must be non-empty"));
        }
        let len: usize = shape.iter().product();
        if len != values.len() {
            return Err(Error::arg(format!("shape {shape:?} needs {len} values, got {}", values.len())));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Numeric(format!("grid value {i} is not finite")));
        }
        Ok(GridFunction { domain, shape, values })
    }

    /// Samples `f` at every grid node.
    pub fn from_fn(domain: BoxDomain, shape: Vec<usize>, f: impl Fn(&[f64]) -> f64) -> Result<Self> {
        let probe = GridFunction { domain, shape, values: Vec::new() };
        let len: usize = probe.shape.iter().product();
        let mut point = vec![0.0; probe.dim()];
        let values = (0..len)
            .map(|flat| {
                probe.point_of(flat, &mut point);
                f(&point)
            })
            .collect();
        GridFunction::new(probe.domain, probe.shape, values)
    }

    pub fn constant(domain: BoxDomain, shape: Vec<usize>, c: f64) -> Result<Self> {
        let len = shape.iter().product();
        GridFunction::new(domain, shape, vec![c; len])
    }

    pub fn domain(&self) -> &BoxDomain {
        &self.domain
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn dim(&self) -> usize {
        self.shape.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Coordinate of node `i` along `axis`.
    pub fn coord(&self, axis: usize, i: usize) -> f64 {
        self.domain.from_canonical(axis, node_position(i, self.shape[axis]))
    }

    /// Quadrature weight of one sample along `axis`.
    pub fn cell_measure(&self, axis: usize) -> f64 {
        self.domain.width(axis) / self.shape[axis] as f64
    }

    pub fn flat_index(&self, idx: &[usize]) -> usize {
        idx.iter()
            .zip(&self.shape)
            .rev()
            .fold(0, |acc, (&i, &s)| acc * s + i)
    }

    /// Writes the coordinates of the node at `flat` into `point`.
    pub fn point_of(&self, mut flat: usize, point: &mut [f64]) {
        for (axis, (&s, p)) in self.shape.iter().zip(point.iter_mut()).enumerate() {
            *p = self.coord(axis, flat % s);
            flat /= s;
        }
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<GridFunction> {
        GridFunction::new(self.domain.clone(), self.shape.clone(), self.values.iter().map(|&v| f(v)).collect())
    }

    /// Pointwise combination of two grids with identical shape and domain.
    pub fn zip_with(&self, other: &GridFunction, f: impl Fn(f64, f64) -> f64) -> Result<GridFunction> {
        self.check_compatible(other)?;
        let values = self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect();
        GridFunction::new(self.domain.clone(), self.shape.clone(), values)
    }

    pub fn check_compatible(&self, other: &GridFunction) -> Result<()> {
        if self.shape != other.shape {
            return Err(Error::arg(format!("shape mismatch: {:?} vs {:?}", self.shape, other.shape)));
        }
        if self.domain != other.domain {
            return Err(Error::arg("grids live on different domains"));
        }
        Ok(())
    }

    /// Same samples, reinterpreted on another box.
    pub fn with_domain(&self, domain: BoxDomain) -> Result<GridFunction> {
        GridFunction::new(domain, self.shape.clone(), self.values.clone())
    }

    /// Piecewise-constant view: `u ↦ g[min(⌊u (N−1)⌋, N−1)]` per axis.
    pub fn step_field(&self) -> GridStepField<'_> {
        GridStepField { grid: self }
    }
}

/// Position in `[0, 1]` of node `i` out of `n` (endpoint inclusive).
pub(crate) fn node_position(i: usize, n: usize) -> f64 {
    if n <= 1 {
        0.0
    } else {
        i as f64 / (n - 1) as f64
    }
}

/// Floor index of canonical coordinate `u` on an `n`-node axis, clamped.
pub(crate) fn floor_index(u: f64, n: usize) -> usize {
    let t = (u.clamp(0.0, 1.0) * (n - 1) as f64).floor() as usize;
    t.min(n - 1)
}

pub struct GridStepField<'a> {
    grid: &'a GridFunction,
}

impl Field for GridStepField<'_> {
    fn domain(&self) -> &BoxDomain {
        &self.grid.domain
    }

    fn eval(&self, x: &[f64]) -> f64 {
        let g = self.grid;
        let flat = x
            .iter()
            .enumerate()
            .rev()
            .fold(0, |acc, (axis, &v)| {
                let n = g.shape[axis];
                acc * n + floor_index(g.domain.to_canonical(axis, v), n)
            });
        g.values[flat]
    }
}

/// Kantorovich coefficients `A_k`, `k ∈ [−n, n−1]^r`, stored densely with
/// offset `k + n` and axis 1 fastest.
///
/// Masked coefficients (built from partially missing data) carry a validity
/// flag per cell; invalid cells are dropped from both sums of the operator.
#[derive(Debug, Clone, PartialEq)]
pub struct CellAverageTensor {
    n: usize,
    domain: BoxDomain,
    coeffs: Vec<f64>,
    valid: Option<Vec<bool>>,
}

impl CellAverageTensor {
    /// Wraps explicit coefficients, e.g. for tests.
    pub fn from_coeffs(n: usize, domain: BoxDomain, coeffs: Vec<f64>) -> Result<Self> {
        Self::build(n, domain, coeffs, None)
    }

    pub fn from_masked_coeffs(n: usize, domain: BoxDomain, coeffs: Vec<f64>, valid: Vec<bool>) -> Result<Self> {
        Self::build(n, domain, coeffs, Some(valid))
    }

    fn build(n: usize, domain: BoxDomain, coeffs: Vec<f64>, valid: Option<Vec<bool>>) -> Result<Self> {
        if n == 0 {
            return Err(Error::arg("n must be at least 1"));
        }
        let expected = (2 * n).pow(domain.dim() as u32);
        if coeffs.len() != expected {
            return Err(Error::arg(format!("need (2n)^r = {expected} coefficients, got {}", coeffs.len())));
        }
        if let Some(v) = &valid {
            if v.len() != expected {
                return Err(Error::arg("validity mask length differs from coefficient count"));
            }
        }
        if let Some(i) = coeffs.iter().position(|c| !c.is_finite()) {
            return Err(Error::Numeric(format!("coefficient {i} is not finite")));
        }
        Ok(CellAverageTensor { n, domain, coeffs, valid })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.domain.dim()
    }

    pub fn domain(&self) -> &BoxDomain {
        &self.domain
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn validity(&self) -> Option<&[bool]> {
        self.valid.as_deref()
    }

    /// Flat storage index of multi-index `k`.
    pub fn offset(&self, k: &[i64]) -> usize {
        let side = 2 * self.n as i64;
        k.iter().rev().fold(0i64, |acc, &ki| acc * side + ki + self.n as i64) as usize
    }

    /// `A_k`.
    pub fn get(&self, k: &[i64]) -> f64 {
        self.coeffs[self.offset(k)]
    }

    pub fn is_valid(&self, k: &[i64]) -> bool {
        self.valid.as_ref().is_none_or(|v| v[self.offset(k)])
    }

    /// Smallest and largest coefficient over valid cells.
    pub fn range(&self) -> (f64, f64) {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(i, _)| self.valid.as_ref().is_none_or(|v| v[*i]))
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), (_, &c)| (lo.min(c), hi.max(c)))
    }
}

fn multi_index(mut flat: usize, side: usize, r: usize, out: &mut [usize]) {
    for slot in out.iter_mut().take(r) {
        *slot = flat % side;
        flat /= side;
    }
}

/// Canonical subsample coordinates `k/n + (p − ½)/(nm)` for every cell of one
/// axis, clamped to `[0, 1]`, in domain coordinates.
fn subsample_axis(domain: &BoxDomain, axis: usize, n: usize, m: usize) -> Vec<f64> {
    let nf = n as f64;
    let step = 1.0 / (nf * m as f64);
    (0..2 * n)
        .flat_map(|cell| {
            let k = cell as f64 - nf;
            (0..m).map(move |p| (k / nf + (p as f64 + 0.5) * step).clamp(0.0, 1.0))
        })
        .map(|u| domain.from_canonical(axis, u))
        .collect()
}

/// One cell: (sum of usable samples, number of usable samples).
fn cell_sum<F: Field + ?Sized>(
    f: &F,
    samples: &[Vec<f64>],
    cell: &[usize],
    m: usize,
    point: &mut [f64],
    skip_nan: bool,
) -> std::result::Result<(f64, usize), f64> {
    let r = samples.len();
    let total = m.pow(r as u32);
    let mut sum = 0.0;
    let mut count = 0;
    for sub in 0..total {
        let mut s = sub;
        for axis in 0..r {
            point[axis] = samples[axis][cell[axis] * m + s % m];
            s /= m;
        }
        let v = f.eval(point);
        if v.is_finite() {
            sum += v;
            count += 1;
        } else if !(skip_nan && v.is_nan()) {
            return Err(v);
        }
    }
    Ok((sum, count))
}

fn averages<F: Field + ?Sized>(f: &F, n: usize, m: usize, masked: bool) -> Result<CellAverageTensor> {
    if n == 0 || m == 0 {
        return Err(Error::arg(format!("need n >= 1 and m >= 1, got n={n}, m={m}")));
    }
    let domain = f.domain().clone();
    let r = domain.dim();
    let side = 2 * n;
    let cells = side.pow(r as u32);
    let samples: Vec<Vec<f64>> = (0..r).map(|a| subsample_axis(&domain, a, n, m)).collect();

    let sums: Vec<(f64, usize)> = (0..cells)
        .into_par_iter()
        .map_init(
            || (vec![0usize; r], vec![0.0; r]),
            |(cell, point), flat| {
                multi_index(flat, side, r, cell);
                cell_sum(f, &samples, cell, m, point, masked).map_err(|bad| {
                    let k: Vec<i64> = cell.iter().map(|&c| c as i64 - n as i64).collect();
                    Error::Numeric(format!("non-finite sample {bad} in cell k = {k:?}"))
                })
            },
        )
        .collect::<Result<_>>()?;

    let coeffs = sums
        .iter()
        .map(|&(s, c)| if c == 0 { 0.0 } else { s / c as f64 })
        .collect();
    if masked {
        let valid = sums.iter().map(|&(_, c)| c > 0).collect();
        CellAverageTensor::from_masked_coeffs(n, domain, coeffs, valid)
    } else {
        CellAverageTensor::from_coeffs(n, domain, coeffs)
    }
}

/// Midpoint-rule cell averages `A_k` with `m` subsamples per cell axis.
pub fn cell_averages<F: Field + ?Sized>(f: &F, n: usize, m: usize) -> Result<CellAverageTensor> {
    averages(f, n, m, false)
}

/// Cell averages over the finite samples only; NaN marks missing data.
///
/// Cells without any finite subsample are flagged invalid.
pub fn masked_cell_averages<F: Field + ?Sized>(f: &F, n: usize, m: usize) -> Result<CellAverageTensor> {
    averages(f, n, m, true)
}

/// Kernel weights `Ψ(nu − k)` of one canonical coordinate, restricted to
/// `k ∈ [−n, n−1]` and the kernel's effective radius.
#[derive(Debug, Clone)]
struct AxisWindow {
    /// Storage offset (`k + n`) of the first weight.
    start: usize,
    weights: Vec<f64>,
}

fn axis_window(kernel: &DensityKernel, n: usize, u: f64) -> AxisWindow {
    let nf = n as f64;
    let t = nf * u;
    let radius = kernel.effective_radius();
    let lo = ((t - radius).ceil() as i64).max(-(n as i64));
    let hi = ((t + radius).floor() as i64).min(n as i64 - 1);
    if lo > hi {
        return AxisWindow { start: 0, weights: Vec::new() };
    }
    AxisWindow {
        start: (lo + n as i64) as usize,
        weights: (lo..=hi).map(|k| kernel.eval(t - k as f64)).collect(),
    }
}

/// `K_n f(x)` at a single point `x` of the coefficient domain.
pub fn kantorovich_eval(coeffs: &CellAverageTensor, kernel: &DensityKernel, x: &[f64]) -> Result<f64> {
    let domain = coeffs.domain();
    if !domain.contains(x) {
        return Err(Error::arg(format!("point {x:?} lies outside the operator domain")));
    }
    let r = domain.dim();
    let n = coeffs.n();
    let side = 2 * n;
    let windows: Vec<AxisWindow> = (0..r)
        .map(|a| axis_window(kernel, n, domain.to_canonical(a, x[a]).clamp(0.0, 1.0)))
        .collect();
    let total: usize = windows.iter().map(|w| w.weights.len()).product();

    let mut num = 0.0;
    let mut den = 0.0;
    let mut pos = vec![0usize; r];
    for _ in 0..total {
        let mut weight = 1.0;
        let mut flat = 0;
        for axis in (0..r).rev() {
            weight *= windows[axis].weights[pos[axis]];
            flat = flat * side + windows[axis].start + pos[axis];
        }
        if coeffs.valid.as_ref().is_none_or(|v| v[flat]) {
            num += coeffs.coeffs[flat] * weight;
            den += weight;
        }
        for axis in 0..r {
            pos[axis] += 1;
            if pos[axis] < windows[axis].weights.len() {
                break;
            }
            pos[axis] = 0;
        }
    }
    if !(den >= MIN_KERNEL_SUM) {
        return Err(Error::DegenerateKernel { sum: den, point: x.to_vec() });
    }
    Ok(num / den)
}

/// Contracts `axis` of a dense tensor (axis 0 fastest) against per-output
/// kernel windows.
fn contract_axis(data: &[f64], shape: &[usize], axis: usize, windows: &[AxisWindow]) -> Vec<f64> {
    let inner: usize = shape[..axis].iter().product();
    let len_in = shape[axis];
    let len_out = windows.len();
    let outer: usize = shape[axis + 1..].iter().product();
    let mut out = vec![0.0; inner * len_out * outer];
    out.par_chunks_mut(inner * len_out)
        .enumerate()
        .for_each(|(o, chunk)| {
            let src = &data[o * inner * len_in..(o + 1) * inner * len_in];
            for (i, w) in windows.iter().enumerate() {
                let dst = &mut chunk[i * inner..(i + 1) * inner];
                for (j, &wt) in w.weights.iter().enumerate() {
                    let row = &src[(w.start + j) * inner..(w.start + j + 1) * inner];
                    for (d, &s) in dst.iter_mut().zip(row) {
                        *d += wt * s;
                    }
                }
            }
        });
    out
}

/// `K_n f` on the endpoint-inclusive grid of the coefficient domain.
///
/// Uses the tensor-product structure of the kernel: each axis is contracted
/// in turn. Every output value depends only on its own weights, so results do
/// not depend on thread scheduling.
pub fn kantorovich_grid(
    coeffs: &CellAverageTensor,
    kernel: &DensityKernel,
    out_shape: &[usize],
) -> Result<GridFunction> {
    let domain = coeffs.domain().clone();
    let r = domain.dim();
    if out_shape.len() != r {
        return Err(Error::arg(format!("output shape has {} axes, operator has {r}", out_shape.len())));
    }
    if out_shape.contains(&0) {
        return Err(Error::arg("output axes must be non-empty"));
    }
    let n = coeffs.n();
    let windows: Vec<Vec<AxisWindow>> = out_shape
        .iter()
        .map(|&len| (0..len).map(|i| axis_window(kernel, n, node_position(i, len))).collect())
        .collect();

    let contract_all = |mut data: Vec<f64>| {
        let mut shape = vec![2 * n; r];
        for axis in 0..r {
            data = contract_axis(&data, &shape, axis, &windows[axis]);
            shape[axis] = out_shape[axis];
        }
        data
    };

    let (num, den) = match &coeffs.valid {
        None => {
            let num = contract_all(coeffs.coeffs.clone());
            let sums: Vec<Vec<f64>> = windows
                .iter()
                .map(|ws| ws.iter().map(|w| w.weights.iter().sum()).collect())
                .collect();
            let total: usize = out_shape.iter().product();
            let den = (0..total)
                .map(|mut flat| {
                    let mut d = 1.0;
                    for (axis, s) in sums.iter().enumerate() {
                        d *= s[flat % out_shape[axis]];
                        flat /= out_shape[axis];
                    }
                    d
                })
                .collect::<Vec<f64>>();
            (num, den)
        }
        Some(valid) => {
            let masked: Vec<f64> = coeffs
                .coeffs
                .iter()
                .zip(valid)
                .map(|(&c, &v)| if v { c } else { 0.0 })
                .collect();
            let indicator: Vec<f64> = valid.iter().map(|&v| if v { 1.0 } else { 0.0 }).collect();
            (contract_all(masked), contract_all(indicator))
        }
    };

    let probe = GridFunction { domain: domain.clone(), shape: out_shape.to_vec(), values: Vec::new() };
    let mut values = Vec::with_capacity(num.len());
    for (flat, (&a, &b)) in num.iter().zip(&den).enumerate() {
        if !(b >= MIN_KERNEL_SUM) {
            let mut point = vec![0.0; r];
            probe.point_of(flat, &mut point);
            return Err(Error::DegenerateKernel { sum: b, point });
        }
        values.push(a / b);
    }
    GridFunction::new(domain, out_shape.to_vec(), values)
}

/// Builds the coefficients of `f` and samples `K_n f` on a uniform grid.
pub fn kantorovich_apply_grid<F: Field + ?Sized>(
    f: &F,
    kernel: &DensityKernel,
    n: usize,
    m: usize,
    out_shape: &[usize],
) -> Result<GridFunction> {
    if out_shape.iter().any(|&s| s < 2) {
        return Err(Error::arg(format!("every output axis needs at least 2 nodes, got {out_shape:?}")));
    }
    let coeffs = cell_averages(f, n, m)?;
    kantorovich_grid(&coeffs, kernel, out_shape)
}

/// `(‖Ψ‖₁ / Ψ(2))^{Σ 1/p_i}`, the operator-norm bound on mixed Lebesgue spaces.
///
/// Infinite for kernels with `Ψ(2) = 0`.
pub fn boundedness_constant(kernel: &DensityKernel, exponents: &[f64]) -> Result<f64> {
    let mass = kernel.l1_norm(4096)?;
    let power: f64 = exponents.iter().map(|p| 1.0 / p).sum();
    if kernel.psi_at_2() == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok((mass / kernel.psi_at_2()).powf(power))
}
