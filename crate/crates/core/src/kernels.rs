//! Sigmoidal activation functions and their density kernels.
//!
//! Every sigmoid here is rescaled to the limits `{0, 1}` and the density is
//! `Ψ_ρ(x) = ½ (ρ(x + 1) − ρ(x − 1))`, which has unit mass and forms a
//! partition of unity over the integer shifts.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Effective half-width used for kernels with unbounded support.
///
/// `Ψ_logistic(40) ≈ 5e-18`, below double precision relative to the unit mass.
pub const DEFAULT_TAIL_CUTOFF: f64 = 40.0;

/// Highest B-spline order with a closed-form sigmoid.
pub const MAX_BSPLINE_ORDER: u32 = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SigmoidKind {
    /// `(1 + e^{-x})^{-1}`
    Logistic,
    /// `e^x / (e^x + e^{-x})`, the hyperbolic tangent sigmoid halved to reach 1.
    Tanh,
    /// `clamp(x + ½, 0, 1)`
    Ramp,
    /// Integral of the central B-spline of the given order.
    BSpline(u32),
}

impl SigmoidKind {
    pub fn validate(self) -> Result<Self> {
        match self {
            SigmoidKind::BSpline(order) if !(1..=MAX_BSPLINE_ORDER).contains(&order) => Err(
                Error::config(format!("unsupported B-spline order {order} (expected 1..=4)")),
            ),
            kind => Ok(kind),
        }
    }

    /// Half-width of the support of `Ψ_ρ`, or `+∞`.
    pub fn support_radius(self) -> f64 {
        match self {
            SigmoidKind::Logistic | SigmoidKind::Tanh => f64::INFINITY,
            SigmoidKind::Ramp => 1.5,
            SigmoidKind::BSpline(order) => order as f64 / 2.0 + 1.0,
        }
    }

    pub fn is_compact(self) -> bool {
        self.support_radius().is_finite()
    }

    /// All kinds the crate implements.
    pub fn all() -> Vec<SigmoidKind> {
        let mut kinds = vec![SigmoidKind::Logistic, SigmoidKind::Tanh, SigmoidKind::Ramp];
        kinds.extend((1..=MAX_BSPLINE_ORDER).map(SigmoidKind::BSpline));
        kinds
    }
}

impl fmt::Display for SigmoidKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SigmoidKind::Logistic => f.write_str("logistic"),
            SigmoidKind::Tanh => f.write_str("tanh"),
            SigmoidKind::Ramp => f.write_str("ramp"),
            SigmoidKind::BSpline(order) => write!(f, "bspline:{order}"),
        }
    }
}

impl FromStr for SigmoidKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let kind = match s.trim() {
            "logistic" => SigmoidKind::Logistic,
            "tanh" => SigmoidKind::Tanh,
            "ramp" => SigmoidKind::Ramp,
            other => {
                let order = other
                    .strip_prefix("bspline:")
                    .ok_or_else(|| Error::config(format!("unknown kernel `{other}`")))?;
                let order = order
                    .parse::<u32>()
                    .map_err(|_| Error::config(format!("bad B-spline order `{order}`")))?;
                SigmoidKind::BSpline(order)
            }
        };
        kind.validate()
    }
}

fn logistic(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

fn binomial(n: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// `∫_{-∞}^x B_n(t) dt` via truncated powers, exact piecewise polynomial.
fn bspline_sigmoid(order: u32, x: f64) -> f64 {
    let half = order as f64 / 2.0;
    if x <= -half {
        return 0.0;
    }
    if x >= half {
        return 1.0;
    }
    let factorial: f64 = (1..=order).map(f64::from).product();
    let mut acc = 0.0;
    for i in 0..=order {
        let t = x + half - i as f64;
        if t <= 0.0 {
            break;
        }
        let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
        acc += sign * binomial(order, i) * t.powi(order as i32);
    }
    (acc / factorial).clamp(0.0, 1.0)
}

/// Evaluates the (rescaled) sigmoid `ρ(x)`.
pub fn sigmoid_eval(kind: SigmoidKind, x: f64) -> Result<f64> {
    let kind = kind.validate()?;
    Ok(sigmoid_unchecked(kind, x))
}

fn sigmoid_unchecked(kind: SigmoidKind, x: f64) -> f64 {
    match kind {
        SigmoidKind::Logistic => logistic(x),
        SigmoidKind::Tanh => logistic(2.0 * x),
        SigmoidKind::Ramp => (x + 0.5).clamp(0.0, 1.0),
        SigmoidKind::BSpline(order) => bspline_sigmoid(order, x),
    }
}

/// A density kernel `Ψ_ρ` together with its cached constants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityKernel {
    kind: SigmoidKind,
    support_radius: f64,
    psi_at_2: f64,
    tail_cutoff: f64,
}

impl DensityKernel {
    pub fn new(kind: SigmoidKind) -> Result<Self> {
        Self::with_tail_cutoff(kind, DEFAULT_TAIL_CUTOFF)
    }

    pub fn with_tail_cutoff(kind: SigmoidKind, tail_cutoff: f64) -> Result<Self> {
        let kind = kind.validate()?;
        if !(tail_cutoff > 0.0 && tail_cutoff.is_finite()) {
            return Err(Error::arg(format!("tail cutoff must be positive, got {tail_cutoff}")));
        }
        let mut kernel = DensityKernel {
            kind,
            support_radius: kind.support_radius(),
            psi_at_2: 0.0,
            tail_cutoff,
        };
        kernel.psi_at_2 = kernel.eval(2.0);
        Ok(kernel)
    }

    pub fn kind(&self) -> SigmoidKind {
        self.kind
    }

    /// Half-width of the exact support; `+∞` for logistic and tanh.
    pub fn support_radius(&self) -> f64 {
        self.support_radius
    }

    /// `Ψ_ρ(2)`, the lower bound of the operator's kernel sum on `[-1, 1]`.
    ///
    /// Zero for the ramp and B-splines of order 1 and 2, whose support ends at
    /// or before 2.
    pub fn psi_at_2(&self) -> f64 {
        self.psi_at_2
    }

    pub fn tail_cutoff(&self) -> f64 {
        self.tail_cutoff
    }

    /// Radius outside of which the kernel is treated as zero.
    pub fn effective_radius(&self) -> f64 {
        self.support_radius.min(self.tail_cutoff)
    }

    /// `Ψ_ρ(x)`.
    pub fn eval(&self, x: f64) -> f64 {
        let a = x.abs();
        if a >= self.support_radius {
            return 0.0;
        }
        match self.kind {
            // ½(σ(sx+s) − σ(sx−s)) = ½ sinh(s) / (cosh(sx) + cosh(s))
            SigmoidKind::Logistic => 0.5 * 1f64.sinh() / (a.cosh() + 1f64.cosh()),
            SigmoidKind::Tanh => 0.5 * 2f64.sinh() / ((2.0 * a).cosh() + 2f64.cosh()),
            kind => {
                let v = 0.5 * (sigmoid_unchecked(kind, a + 1.0) - sigmoid_unchecked(kind, a - 1.0));
                v.max(0.0)
            }
        }
    }

    /// `Ψ_ρ(x_1) ⋯ Ψ_ρ(x_r)`.
    pub fn product(&self, xs: &[f64]) -> Result<f64> {
        if xs.is_empty() {
            return Err(Error::arg("density product needs at least one coordinate"));
        }
        let mut acc = 1.0;
        for &x in xs {
            acc *= self.eval(x);
            if acc == 0.0 {
                break;
            }
        }
        Ok(acc)
    }

    /// Midpoint-rule estimate of `∫ Ψ_ρ`.
    ///
    /// The interval `[-R, R]` (`R` the effective radius) is cut into panels of
    /// width ½ so that the knots of the piecewise-polynomial kernels fall on
    /// panel edges; `quad_points` are spread evenly over the panels.
    pub fn l1_norm(&self, quad_points: usize) -> Result<f64> {
        if quad_points < 64 {
            return Err(Error::arg(format!("need at least 64 quadrature points, got {quad_points}")));
        }
        let radius = (self.effective_radius() * 2.0).ceil() / 2.0;
        let panels = (radius * 4.0).round() as usize;
        let per_panel = quad_points.div_ceil(panels).max(1);
        let h = 0.5 / per_panel as f64;
        let mut total = 0.0;
        for p in 0..panels {
            let start = -radius + 0.5 * p as f64;
            let mut panel = 0.0;
            for q in 0..per_panel {
                panel += self.eval(start + (q as f64 + 0.5) * h);
            }
            total += panel * h;
        }
        Ok(total)
    }
}

impl FromStr for DensityKernel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        DensityKernel::new(s.parse()?)
    }
}
