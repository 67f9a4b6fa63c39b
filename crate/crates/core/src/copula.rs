//! Copula families on the unit square: the Fréchet–Hoeffding bounds, the
//! product and FGM baselines, the bound copula and the perturbed copula.
//!
//! Values are returned exactly as the formulas produce them. Nothing is
//! clamped to `[0, 1]`, because the validator relies on seeing raw values.
//!
//! Ties on the kink lines `u = v` and `u + v = 1` need no convention for the
//! copula values themselves (`min` and `max` are continuous). The piecewise
//! first partials use `I[u <= v]` for the `M` part of `dC/du`, `I[u > v]` for
//! the `M` part of `dC/dv`, and `I[u + v >= 1]` for the `W` part of both.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

fn check_range(name: &'static str, value: f64, lo: f64, hi: f64) -> Result<f64> {
    if value.is_finite() && (lo..=hi).contains(&value) {
        Ok(value)
    } else {
        Err(Error::OutOfRange { name, value, lo, hi })
    }
}

/// A point of the closed unit square.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UnitPoint {
    u: f64,
    v: f64,
}

impl UnitPoint {
    pub fn new(u: f64, v: f64) -> Result<Self> {
        Ok(Self {
            u: check_range("u", u, 0.0, 1.0)?,
            v: check_range("v", v, 0.0, 1.0)?,
        })
    }

    pub fn u(&self) -> f64 {
        self.u
    }

    pub fn v(&self) -> f64 {
        self.v
    }
}

/// Dependence parameter `theta` in `[-1, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct DependenceParam(f64);

impl DependenceParam {
    pub fn new(theta: f64) -> Result<Self> {
        check_range("theta", theta, -1.0, 1.0).map(Self)
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for DependenceParam {
    type Error = Error;

    fn try_from(value: f64) -> Result<Self> {
        Self::new(value)
    }
}

impl fmt::Display for DependenceParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl From<DependenceParam> for f64 {
    fn from(p: DependenceParam) -> f64 {
        p.0
    }
}

/// Perturbation parameter `alpha` in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct PerturbParam(f64);

impl PerturbParam {
    pub fn new(alpha: f64) -> Result<Self> {
        check_range("alpha", alpha, 0.0, 1.0).map(Self)
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for PerturbParam {
    type Error = Error;

    fn try_from(value: f64) -> Result<Self> {
        Self::new(value)
    }
}

impl fmt::Display for PerturbParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl From<PerturbParam> for f64 {
    fn from(p: PerturbParam) -> f64 {
        p.0
    }
}

/// Closed description of a bivariate copula candidate.
///
/// Parameters are validated when the spec is built, so evaluation itself is
/// branch-light and can sit in quadrature inner loops.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum CopulaSpec {
    /// `uv`
    Product,
    /// `uv + theta uv(1-u)(1-v)`
    Fgm { theta: DependenceParam },
    /// `M(u,v) = min(u, v)`
    FrechetUpper,
    /// `W(u,v) = max(u + v - 1, 0)`
    FrechetLower,
    /// `(1-theta^2) uv + theta/4 [(1+theta)^2 M - (1-theta)^2 W]`
    Bound { theta: DependenceParam },
    /// `base + alpha/2 (M - W)`
    Perturbed { base: Box<CopulaSpec>, alpha: PerturbParam },
}

/// Weights of the bound copula written as `pi * uv + m * M - w * W`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct BoundWeights {
    pub pi: f64,
    pub m: f64,
    pub w: f64,
}

impl BoundWeights {
    pub(crate) fn new(theta: f64) -> Self {
        Self {
            pi: 1.0 - theta * theta,
            m: theta * (1.0 + theta) * (1.0 + theta) / 4.0,
            w: theta * (1.0 - theta) * (1.0 - theta) / 4.0,
        }
    }
}

impl CopulaSpec {
    pub fn bound(theta: f64) -> Result<Self> {
        Ok(Self::Bound {
            theta: DependenceParam::new(theta)?,
        })
    }

    pub fn fgm(theta: f64) -> Result<Self> {
        Ok(Self::Fgm {
            theta: DependenceParam::new(theta)?,
        })
    }

    pub fn perturbed(base: CopulaSpec, alpha: f64) -> Result<Self> {
        Ok(Self::Perturbed {
            base: Box::new(base),
            alpha: PerturbParam::new(alpha)?,
        })
    }

    pub fn family_name(&self) -> &'static str {
        match self {
            Self::Product => "product",
            Self::Fgm { .. } => "fgm",
            Self::FrechetUpper => "frechet-upper",
            Self::FrechetLower => "frechet-lower",
            Self::Bound { .. } => "bound",
            Self::Perturbed { .. } => "perturbed",
        }
    }

    /// Raw formula value at `(u, v)`; callers guarantee the point is in the
    /// unit square.
    pub fn eval(&self, u: f64, v: f64) -> f64 {
        match self {
            Self::Product => u * v,
            Self::Fgm { theta } => u * v + theta.get() * u * v * (1.0 - u) * (1.0 - v),
            Self::FrechetUpper => upper(u, v),
            Self::FrechetLower => lower(u, v),
            Self::Bound { theta } => {
                let t = theta.get();
                (1.0 - t * t) * u * v
                    + t / 4.0 * ((1.0 + t) * (1.0 + t) * upper(u, v) - (1.0 - t) * (1.0 - t) * lower(u, v))
            }
            Self::Perturbed { base, alpha } => base.eval(u, v) + alpha.get() / 2.0 * bounds_gap(u, v),
        }
    }

    /// `dC/du`, piecewise closed form.
    pub fn partial_u(&self, u: f64, v: f64) -> f64 {
        let m = if u <= v { 1.0 } else { 0.0 };
        let w = if u + v >= 1.0 { 1.0 } else { 0.0 };
        match self {
            Self::Product => v,
            Self::Fgm { theta } => v + theta.get() * v * (1.0 - v) * (1.0 - 2.0 * u),
            Self::FrechetUpper => m,
            Self::FrechetLower => w,
            Self::Bound { theta } => {
                let k = BoundWeights::new(theta.get());
                k.pi * v + k.m * m - k.w * w
            }
            Self::Perturbed { base, alpha } => base.partial_u(u, v) + alpha.get() / 2.0 * (m - w),
        }
    }

    /// `dC/dv`, piecewise closed form.
    pub fn partial_v(&self, u: f64, v: f64) -> f64 {
        let m = if u > v { 1.0 } else { 0.0 };
        let w = if u + v >= 1.0 { 1.0 } else { 0.0 };
        match self {
            Self::Product => u,
            Self::Fgm { theta } => u + theta.get() * u * (1.0 - u) * (1.0 - 2.0 * v),
            Self::FrechetUpper => m,
            Self::FrechetLower => w,
            Self::Bound { theta } => {
                let k = BoundWeights::new(theta.get());
                k.pi * u + k.m * m - k.w * w
            }
            Self::Perturbed { base, alpha } => base.partial_v(u, v) + alpha.get() / 2.0 * (m - w),
        }
    }

    /// Mixed second partial, for families where it exists everywhere.
    pub fn density(&self, u: f64, v: f64) -> Option<f64> {
        match self {
            Self::Product => Some(1.0),
            Self::Fgm { theta } => Some(1.0 + theta.get() * (1.0 - 2.0 * u) * (1.0 - 2.0 * v)),
            _ => None,
        }
    }

    pub fn has_density(&self) -> bool {
        matches!(self, Self::Product | Self::Fgm { .. })
    }

    pub(crate) fn volume_raw(&self, u1: f64, u2: f64, v1: f64, v2: f64) -> f64 {
        self.eval(u1, v1) + self.eval(u2, v2) - self.eval(u1, v2) - self.eval(u2, v1)
    }
}

impl fmt::Display for CopulaSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Product | Self::FrechetUpper | Self::FrechetLower => f.write_str(self.family_name()),
            Self::Fgm { theta } | Self::Bound { theta } => {
                write!(f, "{}(theta={})", self.family_name(), theta.get())
            }
            Self::Perturbed { base, alpha } => write!(f, "perturbed(base={},alpha={})", base, alpha.get()),
        }
    }
}

/// Axis-aligned rectangle `[u1, u2] x [v1, v2]` inside the unit square.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rectangle {
    pub u1: f64,
    pub u2: f64,
    pub v1: f64,
    pub v2: f64,
}

impl Rectangle {
    pub fn new(u1: f64, u2: f64, v1: f64, v2: f64) -> Result<Self> {
        let ok = [u1, u2, v1, v2].iter().all(|x| x.is_finite())
            && 0.0 <= u1
            && u1 <= u2
            && u2 <= 1.0
            && 0.0 <= v1
            && v1 <= v2
            && v2 <= 1.0;
        if ok {
            Ok(Self { u1, u2, v1, v2 })
        } else {
            Err(Error::InvalidConfig(format!(
                "rectangle [{u1}, {u2}] x [{v1}, {v2}] is not ordered inside the unit square"
            )))
        }
    }

    pub(crate) fn corners(&self) -> [(f64, f64); 4] {
        [
            (self.u1, self.v1),
            (self.u2, self.v2),
            (self.u1, self.v2),
            (self.u2, self.v1),
        ]
    }
}

fn upper(u: f64, v: f64) -> f64 {
    u.min(v)
}

fn lower(u: f64, v: f64) -> f64 {
    (u + v - 1.0).max(0.0)
}

/// `M - W` by the four-region case split.
fn bounds_gap(u: f64, v: f64) -> f64 {
    match (u <= v, u + v <= 1.0) {
        (true, true) => u,
        (true, false) => 1.0 - v,
        (false, true) => v,
        (false, false) => 1.0 - u,
    }
}

pub fn eval_frechet_upper(p: UnitPoint) -> f64 {
    upper(p.u, p.v)
}

pub fn eval_frechet_lower(p: UnitPoint) -> f64 {
    lower(p.u, p.v)
}

/// Difference `M - W`; always one of `u`, `v`, `1 - u`, `1 - v`.
pub fn frechet_diff(p: UnitPoint) -> f64 {
    bounds_gap(p.u, p.v)
}

pub fn eval_copula(spec: &CopulaSpec, p: UnitPoint) -> f64 {
    spec.eval(p.u, p.v)
}

/// Joint survival value `1 - u - v + C(u, v)`.
pub fn eval_survival(spec: &CopulaSpec, p: UnitPoint) -> f64 {
    1.0 - p.u - p.v + spec.eval(p.u, p.v)
}

/// `(C(u, u), C(u, 1 - u))`.
pub fn diagonal_sections(spec: &CopulaSpec, u: f64) -> Result<(f64, f64)> {
    let u = check_range("u", u, 0.0, 1.0)?;
    Ok((spec.eval(u, u), spec.eval(u, 1.0 - u)))
}

/// Four-corner C-volume of a rectangle.
pub fn c_volume(spec: &CopulaSpec, r: &Rectangle) -> f64 {
    spec.volume_raw(r.u1, r.u2, r.v1, r.v2)
}
