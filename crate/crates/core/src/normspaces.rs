//! Mixed-norm Lebesgue norms and mixed-norm Orlicz modulars on grids.
//!
//! Integrals use the equal-weight cell rule of the grid: every sample stands
//! for a cell of width `(upper − lower) / N` along each axis. Nesting runs
//! from axis 1 (innermost) outwards:
//!
//! ```text
//! ‖f‖_P  = ( ∫ ( ∫ |f|^{p1} dx1 )^{p2/p1} dx2 … )^{1/pr}
//! I^Φ[f] = ∫ φr( … ∫ φ2( ∫ φ1(|f|) dx1 ) dx2 … ) dxr
//! ```

use std::f64::consts::E;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::operator::GridFunction;

/// Exponent tuple `(p_1, …, p_r)`, every entry finite and `≥ 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct MixedExponents(Vec<f64>);

impl MixedExponents {
    pub fn new(p: Vec<f64>) -> Result<Self> {
        if p.is_empty() {
            return Err(Error::arg("exponent tuple is empty"));
        }
        if let Some(bad) = p.iter().find(|&&v| !(v.is_finite() && v >= 1.0)) {
            return Err(Error::arg(format!("exponents must be finite and >= 1, got {bad}")));
        }
        Ok(MixedExponents(p))
    }

    /// The same exponent on every axis.
    pub fn uniform(p: f64, r: usize) -> Result<Self> {
        MixedExponents::new(vec![p; r])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    /// True when some `p_i > p_{i+1}`.
    pub fn is_decreasing_somewhere(&self) -> bool {
        self.0.windows(2).any(|w| w[0] > w[1])
    }

    /// Hölder conjugates `q_i = p_i / (p_i − 1)`.
    pub fn conjugate(&self) -> Result<Self> {
        if self.0.iter().any(|&p| p <= 1.0) {
            return Err(Error::arg("exponent 1 has an infinite conjugate"));
        }
        Ok(MixedExponents(self.0.iter().map(|&p| p / (p - 1.0)).collect()))
    }
}

impl fmt::Display for MixedExponents {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|p| p.to_string()).collect();
        f.write_str(&parts.join(","))
    }
}

impl FromStr for MixedExponents {
    type Err = Error;

    /// Parses `"p1,p2[,p3]"`.
    fn from_str(s: &str) -> Result<Self> {
        let p = s
            .split(',')
            .map(|t| {
                t.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::config(format!("bad exponent `{t}` in `{s}`")))
            })
            .collect::<Result<Vec<_>>>()?;
        MixedExponents::new(p)
    }
}

fn check_dim(g: &GridFunction, r: usize) -> Result<()> {
    if g.dim() != r {
        return Err(Error::arg(format!("grid has {} axes but {r} exponents/functions were given", g.dim())));
    }
    Ok(())
}

/// Integrates axis 0 of `data` (shape `shape`, axis 0 fastest) with weight `w`.
fn integrate_innermost(data: &[f64], len: usize, w: f64) -> Vec<f64> {
    data.chunks(len).map(|row| row.iter().sum::<f64>() * w).collect()
}

/// `‖g‖_P` by nested cell-rule integration.
pub fn mixed_lebesgue_norm(g: &GridFunction, exponents: &MixedExponents) -> Result<f64> {
    let p = exponents.as_slice();
    check_dim(g, p.len())?;
    let scale = g.values().iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if scale == 0.0 {
        return Ok(0.0);
    }
    // homogeneity: integrate |g| / max|g| to keep powers in range
    let mut data: Vec<f64> = g.values().iter().map(|v| (v.abs() / scale).powf(p[0])).collect();
    for axis in 0..p.len() {
        data = integrate_innermost(&data, g.shape()[axis], g.cell_measure(axis));
        if axis + 1 < p.len() {
            let e = p[axis + 1] / p[axis];
            data.iter_mut().for_each(|v| *v = v.powf(e));
        }
    }
    Ok(scale * data[0].powf(1.0 / p[p.len() - 1]))
}

/// `‖f − g‖_P`.
pub fn mixed_lebesgue_error(f: &GridFunction, g: &GridFunction, exponents: &MixedExponents) -> Result<f64> {
    mixed_lebesgue_norm(&f.zip_with(g, |a, b| a - b)?, exponents)
}

/// `max |f − g|` over the grid.
pub fn sup_error(f: &GridFunction, g: &GridFunction) -> Result<f64> {
    if f.shape() != g.shape() {
        return Err(Error::arg(format!("shape mismatch: {:?} vs {:?}", f.shape(), g.shape())));
    }
    Ok(f.values()
        .iter()
        .zip(g.values())
        .fold(0.0f64, |m, (a, b)| m.max((a - b).abs())))
}

/// Orlicz functions: convex, non-decreasing, `φ(0) = 0`, `φ(∞) = ∞`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OrliczFunction {
    /// `u^p`, `p ≥ 1`
    Power(f64),
    /// `e^{u^α} − 1`, `α > 0`
    Exponential(f64),
    /// `u^α log^β(e + u)`, `α ≥ 1`, `β > 0`
    Logarithmic(f64, f64),
}

impl OrliczFunction {
    pub fn validate(self) -> Result<Self> {
        let ok = match self {
            OrliczFunction::Power(p) => p.is_finite() && p >= 1.0,
            OrliczFunction::Exponential(a) => a.is_finite() && a > 0.0,
            OrliczFunction::Logarithmic(a, b) => a.is_finite() && b.is_finite() && a >= 1.0 && b > 0.0,
        };
        if ok {
            Ok(self)
        } else {
            Err(Error::config(format!("invalid Orlicz parameters: {self}")))
        }
    }

    /// `φ(u)`; `None` when the exponential overflows.
    fn eval_raw(self, u: f64) -> Option<f64> {
        let v = match self {
            OrliczFunction::Power(p) => u.powf(p),
            OrliczFunction::Exponential(a) => u.powf(a).exp_m1(),
            OrliczFunction::Logarithmic(a, b) => u.powf(a) * (E + u).ln().powf(b),
        };
        v.is_finite().then_some(v)
    }

    /// `φ(u)` for `u ≥ 0`. Overflow saturates at `f64::MAX`.
    pub fn eval(self, u: f64) -> Result<f64> {
        if !(u >= 0.0) {
            return Err(Error::arg(format!("Orlicz functions take u >= 0, got {u}")));
        }
        Ok(self.eval_raw(u).unwrap_or(f64::MAX))
    }
}

impl fmt::Display for OrliczFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OrliczFunction::Power(p) => write!(f, "pow:{p}"),
            OrliczFunction::Exponential(a) => write!(f, "exp:{a}"),
            OrliczFunction::Logarithmic(a, b) => write!(f, "log:{a}:{b}"),
        }
    }
}

impl FromStr for OrliczFunction {
    type Err = Error;

    /// `pow:<p>`, `exp:<alpha>` or `log:<alpha>:<beta>`.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.trim().split(':').collect();
        let num = |t: &str| {
            t.parse::<f64>()
                .map_err(|_| Error::config(format!("bad number `{t}` in Orlicz token `{s}`")))
        };
        let phi = match parts.as_slice() {
            ["pow", p] => OrliczFunction::Power(num(p)?),
            ["exp", a] => OrliczFunction::Exponential(num(a)?),
            ["log", a, b] => OrliczFunction::Logarithmic(num(a)?, num(b)?),
            _ => return Err(Error::config(format!("unknown Orlicz token `{s}`"))),
        };
        phi.validate()
    }
}

/// `Φ = (φ_1, …, φ_r)`.
#[derive(Debug, Clone, PartialEq)]
pub struct OrliczVector(Vec<OrliczFunction>);

impl OrliczVector {
    pub fn new(phis: Vec<OrliczFunction>) -> Result<Self> {
        if phis.is_empty() {
            return Err(Error::arg("Orlicz vector is empty"));
        }
        let phis = phis.into_iter().map(OrliczFunction::validate).collect::<Result<_>>()?;
        Ok(OrliczVector(phis))
    }

    pub fn as_slice(&self) -> &[OrliczFunction] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }
}

impl fmt::Display for OrliczVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|p| p.to_string()).collect();
        f.write_str(&parts.join(","))
    }
}

impl FromStr for OrliczVector {
    type Err = Error;

    /// Comma-joined Orlicz tokens, e.g. `exp:2,log:2:1.7`.
    fn from_str(s: &str) -> Result<Self> {
        OrliczVector::new(s.split(',').map(str::parse).collect::<Result<_>>()?)
    }
}

/// Value of a modular; `saturated` is set when an Orlicz function overflowed,
/// in which case `value` is `f64::MAX`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Modular {
    pub value: f64,
    pub saturated: bool,
}

/// `I^Φ[λ g]`.
pub fn mixed_orlicz_modular(g: &GridFunction, phi: &OrliczVector, lambda: f64) -> Result<Modular> {
    let phis = phi.as_slice();
    check_dim(g, phis.len())?;
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::arg(format!("lambda must be positive, got {lambda}")));
    }
    let mut saturated = false;
    let mut apply = |phi: OrliczFunction, u: f64| match phi.eval_raw(u) {
        Some(v) => v,
        None => {
            saturated = true;
            f64::MAX
        }
    };
    let mut data: Vec<f64> = g.values().iter().map(|v| apply(phis[0], lambda * v.abs())).collect();
    for axis in 0..phis.len() {
        data = integrate_innermost(&data, g.shape()[axis], g.cell_measure(axis));
        if axis + 1 < phis.len() {
            data.iter_mut().for_each(|v| *v = apply(phis[axis + 1], *v));
        }
    }
    let value = data[0];
    if saturated || !value.is_finite() {
        return Ok(Modular { value: f64::MAX, saturated: true });
    }
    Ok(Modular { value, saturated })
}

/// Bisection budget for [`luxemburg_norm`].
pub const LUXEMBURG_MAX_STEPS: usize = 200;

/// Modular residual accepted by [`luxemburg_norm`].
pub const LUXEMBURG_TOLERANCE: f64 = 1e-8;

/// `inf { λ > 0 : I^Φ[g / λ] ≤ 1 }` by bisection.
pub fn luxemburg_norm(g: &GridFunction, phi: &OrliczVector) -> Result<f64> {
    check_dim(g, phi.dim())?;
    if g.values().iter().all(|&v| v == 0.0) {
        return Ok(0.0);
    }
    // saturated modulars count as "> 1"
    let excess = |lambda: f64| -> Result<f64> {
        let m = mixed_orlicz_modular(g, phi, 1.0 / lambda)?;
        Ok(if m.saturated { f64::INFINITY } else { m.value - 1.0 })
    };

    let mut lo = 1.0;
    let mut hi = 1.0;
    let mut steps = 0;
    while excess(hi)? > 0.0 {
        hi *= 2.0;
        steps += 1;
        if steps > 2000 {
            return Err(Error::Numeric("could not bracket the Luxemburg norm from above".into()));
        }
    }
    while excess(lo)? <= 0.0 {
        lo /= 2.0;
        steps += 1;
        if steps > 2000 {
            return Err(Error::Numeric("could not bracket the Luxemburg norm from below".into()));
        }
    }
    for _ in 0..LUXEMBURG_MAX_STEPS {
        let mid = 0.5 * (lo + hi);
        let e = excess(mid)?;
        if e.abs() <= LUXEMBURG_TOLERANCE {
            return Ok(mid);
        }
        if e > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let e = excess(hi)?;
    if e.abs() <= LUXEMBURG_TOLERANCE {
        return Ok(hi);
    }
    Err(Error::Numeric(format!(
        "Luxemburg bisection did not converge in {LUXEMBURG_MAX_STEPS} steps (residual {e:e})"
    )))
}

/// Both sides of the mixed Hölder inequality `‖fg‖₁ ≤ ‖f‖_P ‖g‖_Q`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HolderReport {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

pub fn holder_check(f: &GridFunction, g: &GridFunction, exponents: &MixedExponents) -> Result<HolderReport> {
    let conj = exponents.conjugate()?;
    let product = f.zip_with(g, |a, b| a * b)?;
    let ones = MixedExponents::uniform(1.0, exponents.dim())?;
    let lhs = mixed_lebesgue_norm(&product, &ones)?;
    let rhs = mixed_lebesgue_norm(f, exponents)? * mixed_lebesgue_norm(g, &conj)?;
    Ok(HolderReport { lhs, rhs, holds: lhs <= rhs + 1e-9 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::BoxDomain;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn ones_sym(n: usize) -> GridFunction {
        GridFunction::constant(BoxDomain::symmetric(2), vec![n, n], 1.0).unwrap()
    }

    fn random_grid(rng: &mut ChaCha8Rng, nx: usize, ny: usize) -> GridFunction {
        let values = (0..nx * ny).map(|_| rng.random_range(-1.0..1.0)).collect();
        GridFunction::new(BoxDomain::unit(2), vec![nx, ny], values).unwrap()
    }

    /// Independent brute force: explicit double loop over (x2, x1).
    fn brute_mixed_2d(g: &GridFunction, p1: f64, p2: f64) -> f64 {
        let [nx, ny] = [g.shape()[0], g.shape()[1]];
        let (w1, w2) = (g.cell_measure(0), g.cell_measure(1));
        let mut outer = 0.0;
        for j in 0..ny {
            let mut inner = 0.0;
            for i in 0..nx {
                inner += g.values()[j * nx + i].abs().powf(p1) * w1;
            }
            outer += inner.powf(p2 / p1) * w2;
        }
        outer.powf(1.0 / p2)
    }

    fn classical_lp(g: &GridFunction, p: f64) -> f64 {
        let w: f64 = (0..g.dim()).map(|a| g.cell_measure(a)).product();
        (g.values().iter().map(|v| v.abs().powf(p)).sum::<f64>() * w).powf(1.0 / p)
    }

    #[test]
    fn parse_tokens() {
        assert_eq!("2,3".parse::<MixedExponents>().unwrap().as_slice(), &[2.0, 3.0]);
        assert!("0.5,2".parse::<MixedExponents>().is_err());
        assert!("2,x".parse::<MixedExponents>().is_err());
        let v: OrliczVector = "exp:2,log:2:1.7,pow:3".parse().unwrap();
        assert_eq!(
            v.as_slice(),
            &[
                OrliczFunction::Exponential(2.0),
                OrliczFunction::Logarithmic(2.0, 1.7),
                OrliczFunction::Power(3.0)
            ]
        );
        assert!("sqrt:2".parse::<OrliczVector>().is_err());
        assert!("log:0.5:1".parse::<OrliczVector>().is_err());
        assert!("4,3".parse::<MixedExponents>().unwrap().is_decreasing_somewhere());
    }

    #[test]
    fn norm_examples() {
        let n = mixed_lebesgue_norm(&ones_sym(64), &"2,3".parse().unwrap()).unwrap();
        assert!((n - 2f64.powf(5.0 / 6.0)).abs() < 1e-12);

        let x = GridFunction::from_fn(BoxDomain::unit(2), vec![2000, 8], |u| u[0]).unwrap();
        let n = mixed_lebesgue_norm(&x, &"2,2".parse().unwrap()).unwrap();
        assert!((n - (1.0f64 / 3.0).sqrt()).abs() < 5e-4, "{n}");

        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let g = random_grid(&mut rng, 32, 32);
        let fast = mixed_lebesgue_norm(&g, &"3,5".parse().unwrap()).unwrap();
        assert!((fast - brute_mixed_2d(&g, 3.0, 5.0)).abs() < 1e-10);
    }

    #[test]
    fn zero_norm_iff_zero() {
        let z = GridFunction::constant(BoxDomain::unit(2), vec![4, 4], 0.0).unwrap();
        assert_eq!(mixed_lebesgue_norm(&z, &"2,3".parse().unwrap()).unwrap(), 0.0);
        let mut v = vec![0.0; 16];
        v[5] = 1e-30;
        let g = GridFunction::new(BoxDomain::unit(2), vec![4, 4], v).unwrap();
        assert!(mixed_lebesgue_norm(&g, &"2,3".parse().unwrap()).unwrap() > 0.0);
    }

    #[test]
    fn dimension_mismatch() {
        let p: MixedExponents = "2,3,4".parse().unwrap();
        assert!(matches!(mixed_lebesgue_norm(&ones_sym(4), &p), Err(Error::Argument(_))));
        let other = GridFunction::constant(BoxDomain::symmetric(2), vec![4, 5], 0.0).unwrap();
        assert!(mixed_lebesgue_error(&ones_sym(4), &other, &"2,3".parse().unwrap()).is_err());
        assert!(sup_error(&ones_sym(4), &other).is_err());
    }

    #[test]
    fn error_examples() {
        let p: MixedExponents = "2,3".parse().unwrap();
        let one = ones_sym(16);
        assert_eq!(mixed_lebesgue_error(&one, &one, &p).unwrap(), 0.0);
        let zero = GridFunction::constant(BoxDomain::symmetric(2), vec![16, 16], 0.0).unwrap();
        let e = mixed_lebesgue_error(&one, &zero, &p).unwrap();
        assert!((e - 2f64.powf(5.0 / 6.0)).abs() < 1e-12);
        let minus = one.map(|v| -v).unwrap();
        assert_eq!(sup_error(&one, &one).unwrap(), 0.0);
        assert_eq!(sup_error(&one, &minus).unwrap(), 2.0);
    }

    #[test]
    fn orlicz_phi_examples() {
        assert_eq!(OrliczFunction::Power(2.0).eval(3.0).unwrap(), 9.0);
        assert_eq!(OrliczFunction::Exponential(1.0).eval(0.0).unwrap(), 0.0);
        let v = OrliczFunction::Logarithmic(1.0, 1.0).eval(1.0).unwrap();
        assert!((v - 1.313_261_687_518_222_8).abs() < 1e-14);
        assert!(OrliczFunction::Power(2.0).eval(-1.0).is_err());
        assert_eq!(OrliczFunction::Exponential(2.0).eval(100.0).unwrap(), f64::MAX);
    }

    #[test]
    fn modular_examples() {
        let zero = GridFunction::constant(BoxDomain::symmetric(2), vec![8, 8], 0.0).unwrap();
        let phi: OrliczVector = "exp:1,log:1:1".parse().unwrap();
        assert_eq!(mixed_orlicz_modular(&zero, &phi, 1.0).unwrap().value, 0.0);

        let power: OrliczVector = "pow:2,pow:1.5".parse().unwrap();
        let m = mixed_orlicz_modular(&ones_sym(32), &power, 1.0).unwrap();
        assert!((m.value - 2f64.powf(2.5)).abs() < 1e-12);
        let norm = mixed_lebesgue_norm(&ones_sym(32), &"2,3".parse().unwrap()).unwrap();
        assert!((m.value - norm.powi(3)).abs() < 1e-12);

        // 2 · φ2(2(e − 1)) with φ2(u) = u ln(e + u), 40-digit reference
        let m = mixed_orlicz_modular(&ones_sym(32), &phi, 1.0).unwrap();
        assert!((m.value - 12.490_119_511_330_269).abs() < 1e-12);
        assert!(!m.saturated);
    }

    #[test]
    fn modular_saturation_is_flagged() {
        let big = GridFunction::constant(BoxDomain::unit(2), vec![4, 4], 50.0).unwrap();
        let phi: OrliczVector = "exp:2,pow:1".parse().unwrap();
        let m = mixed_orlicz_modular(&big, &phi, 1.0).unwrap();
        assert!(m.saturated);
        assert_eq!(m.value, f64::MAX);
        // Luxemburg still converges: saturated modulars just count as > 1
        let n = luxemburg_norm(&big, &phi).unwrap();
        let at = mixed_orlicz_modular(&big, &phi, 1.0 / n).unwrap();
        assert!((at.value - 1.0).abs() <= 1e-8);
    }

    #[test]
    fn luxemburg_examples() {
        let zero = GridFunction::constant(BoxDomain::unit(2), vec![4, 4], 0.0).unwrap();
        assert_eq!(luxemburg_norm(&zero, &"pow:2,pow:2".parse().unwrap()).unwrap(), 0.0);

        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let values: Vec<f64> = (0..200).map(|_| rng.random_range(-3.0..3.0)).collect();
        let g = GridFunction::new(BoxDomain::unit(1), vec![200], values).unwrap();
        for p in [1.0, 2.0, 3.5] {
            let lux = luxemburg_norm(&g, &OrliczVector::new(vec![OrliczFunction::Power(p)]).unwrap()).unwrap();
            assert!((lux - classical_lp(&g, p)).abs() < 1e-6, "p={p}");
        }

        let lux = luxemburg_norm(&ones_sym(16), &"pow:2,pow:1.5".parse().unwrap()).unwrap();
        assert!((lux - 2f64.powf(5.0 / 6.0)).abs() < 1e-8);
    }

    #[test]
    fn holder_examples() {
        let one = ones_sym(16);
        let r = holder_check(&one, &one, &"2,2".parse().unwrap()).unwrap();
        assert!((r.lhs - 4.0).abs() < 1e-12 && (r.rhs - 4.0).abs() < 1e-12 && r.holds);

        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let f = random_grid(&mut rng, 8, 8);
        let zero = f.map(|_| 0.0).unwrap();
        let r = holder_check(&f, &zero, &"2,3".parse().unwrap()).unwrap();
        assert_eq!(r.lhs, 0.0);
        assert!(r.holds);
        assert!(holder_check(&f, &f, &"1,2".parse().unwrap()).is_err());
    }

    #[test]
    fn three_axis_norm() {
        let g = GridFunction::constant(BoxDomain::cube(3, 0.0, 2.0).unwrap(), vec![3, 4, 5], 1.0).unwrap();
        let n = mixed_lebesgue_norm(&g, &"2,3,4".parse().unwrap()).unwrap();
        // ((2^{3/2} · 2)^{4/3} · 2)^{1/4} = 2^{1/2 + 1/3 + 1/4}
        assert!((n - 2f64.powf(0.5 + 1.0 / 3.0 + 0.25)).abs() < 1e-12);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(50))]

        #[test]
        fn diagonal_equals_classical(seed in any::<u64>(), p in prop::sample::select(vec![1.0, 2.0, 4.0])) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let g = random_grid(&mut rng, 17, 23);
            let mixed = mixed_lebesgue_norm(&g, &MixedExponents::uniform(p, 2).unwrap()).unwrap();
            prop_assert!((mixed - classical_lp(&g, p)).abs() < 1e-10);
        }

        #[test]
        fn homogeneity(seed in any::<u64>(), c in -5.0f64..5.0) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let g = random_grid(&mut rng, 12, 9);
            let p: MixedExponents = "2,3".parse().unwrap();
            let scaled = mixed_lebesgue_norm(&g.map(|v| c * v).unwrap(), &p).unwrap();
            prop_assert!((scaled - c.abs() * mixed_lebesgue_norm(&g, &p).unwrap()).abs() < 1e-10);
        }

        #[test]
        fn triangle_inequality(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let f = random_grid(&mut rng, 10, 14);
            let g = random_grid(&mut rng, 10, 14);
            let p: MixedExponents = "1.5,4".parse().unwrap();
            let sum = mixed_lebesgue_norm(&f.zip_with(&g, |a, b| a + b).unwrap(), &p).unwrap();
            prop_assert!(sum <= mixed_lebesgue_norm(&f, &p).unwrap() + mixed_lebesgue_norm(&g, &p).unwrap() + 1e-12);
        }

        #[test]
        fn modular_monotone_in_lambda(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let g = random_grid(&mut rng, 9, 9);
            let phi: OrliczVector = "exp:2,log:2:1.7".parse().unwrap();
            let mut prev = 0.0;
            for lambda in [0.25, 0.5, 1.0, 2.0, 4.0] {
                let m = mixed_orlicz_modular(&g, &phi, lambda).unwrap().value;
                prop_assert!(m >= prev);
                prev = m;
            }
        }

        #[test]
        fn power_modular_coincides_with_norm(seed in any::<u64>(), p1 in 1.0f64..4.0, p2 in 1.0f64..6.0) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let g = random_grid(&mut rng, 11, 13);
            let phi = OrliczVector::new(vec![OrliczFunction::Power(p1), OrliczFunction::Power((p2 / p1).max(1.0))]).unwrap();
            let p2 = p1 * (p2 / p1).max(1.0);
            let m = mixed_orlicz_modular(&g, &phi, 1.0).unwrap().value;
            let n = mixed_lebesgue_norm(&g, &MixedExponents::new(vec![p1, p2]).unwrap()).unwrap();
            prop_assert!((m - n.powf(p2)).abs() <= 1e-8 * m.max(1.0));
        }

        #[test]
        fn holder_holds(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let f = random_grid(&mut rng, 8, 12);
            let g = random_grid(&mut rng, 8, 12);
            prop_assert!(holder_check(&f, &g, &"2,3".parse().unwrap()).unwrap().holds);
        }
    }
}
