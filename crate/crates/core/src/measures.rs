//! Rank dependence measures and tail coefficients.
//!
//! Closed forms cover the families where they are known; [`measures_numeric`]
//! evaluates the defining integrals directly for any [`CopulaSpec`]:
//!
//! * Spearman's rho `= 12 ∫∫ C - 3`
//! * Kendall's tau `= 1 - 4 ∫∫ (dC/du)(dC/dv)`
//! * Blomqvist's beta `= 4 C(1/2, 1/2) - 1`
//! * Gini's gamma `= 4 ∫ [C(u,u) + C(u,1-u) - u] du`
//!
//! The tau integral is the product-of-partials form, which stays valid when
//! the copula has singular components. It is not a density-based estimate.

use serde::{Deserialize, Serialize};

use crate::copula::{BoundWeights, CopulaSpec, DependenceParam, PerturbParam};
use crate::error::{Error, Result};
use crate::quadrature::{integrate_square, integrate_unit, stieltjes_square};

/// Default Richardson tolerance between resolutions `n` and `2n`.
pub const CONVERGENCE_TOL: f64 = 1e-4;

/// Default probe distance from the corner for [`tail_numeric`].
pub const DEFAULT_TAIL_PROBE: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    ClosedForm,
    Quadrature,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeasureReport {
    pub rho: f64,
    pub tau: f64,
    pub beta: f64,
    pub gamma: f64,
    pub method: Method,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub resolution: Option<usize>,
}

impl MeasureReport {
    fn closed(rho: f64, tau: f64, beta: f64, gamma: f64) -> Self {
        Self {
            rho,
            tau,
            beta,
            gamma,
            method: Method::ClosedForm,
            resolution: None,
        }
    }

    pub fn components(&self) -> [f64; 4] {
        [self.rho, self.tau, self.beta, self.gamma]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailCoefficients {
    pub lambda_lower: f64,
    pub lambda_upper: f64,
}

/// Bound copula: rho = beta = gamma = `theta(theta^2+1)/2`, and the reference
/// tau polynomial `theta(8 - 3θ + 12θ² + 6θ³ + 4θ⁴ - 3θ⁵)/24`.
pub fn measures_bound_closed(theta: DependenceParam) -> MeasureReport {
    let t = theta.get();
    let r = t * (t * t + 1.0) / 2.0;
    let tau = t * (8.0 - 3.0 * t + 12.0 * t.powi(2) + 6.0 * t.powi(3) + 4.0 * t.powi(4) - 3.0 * t.powi(5)) / 24.0;
    MeasureReport::closed(r, tau, r, r)
}

pub fn tail_bound_closed(theta: DependenceParam) -> TailCoefficients {
    let lambda = BoundWeights::new(theta.get()).m;
    TailCoefficients {
        lambda_lower: lambda,
        lambda_upper: lambda,
    }
}

/// Shift law for `base + alpha/2 (M - W)`: rho, beta and gamma move by
/// `alpha`; tau moves by `alpha * tau_cross_factor`, where the factor comes
/// from [`tau_cross_integral`].
pub fn measures_perturbed_closed(base: &MeasureReport, alpha: PerturbParam, tau_cross_factor: f64) -> MeasureReport {
    let a = alpha.get();
    MeasureReport {
        rho: base.rho + a,
        tau: base.tau + a * tau_cross_factor,
        beta: base.beta + a,
        gamma: base.gamma + a,
        method: base.method,
        resolution: base.resolution,
    }
}

pub fn tail_perturbed_closed(base: &TailCoefficients, alpha: PerturbParam) -> TailCoefficients {
    let shift = alpha.get() / 2.0;
    TailCoefficients {
        lambda_lower: base.lambda_lower + shift,
        lambda_upper: base.lambda_upper + shift,
    }
}

fn gap(u: f64, v: f64) -> f64 {
    u.min(v) - (u + v - 1.0).max(0.0)
}

fn cross_at(base: &CopulaSpec, n: usize) -> f64 {
    let integral = if base.has_density() {
        integrate_square(n, |u, v| gap(u, v) * base.density(u, v).unwrap_or(0.0))
    } else {
        stieltjes_square(n, gap, |u1, u2, v1, v2| base.volume_raw(u1, u2, v1, v2))
    };
    2.0 * integral
}

/// The factor `2 ∫∫ (M - W) dC` of the tau shift law.
///
/// Uses the closed-form density where the base has one, otherwise a
/// Stieltjes sum against the cell C-volumes (a mixed central difference
/// spanning one cell). Fails when resolutions `n` and `2n` differ by more
/// than [`CONVERGENCE_TOL`].
pub fn tau_cross_integral(base: &CopulaSpec, n: usize) -> Result<f64> {
    let coarse = cross_at(base, n);
    let fine = cross_at(base, 2 * n);
    let delta = (fine - coarse).abs();
    if delta > CONVERGENCE_TOL {
        return Err(Error::NotConverged { estimate: fine, delta });
    }
    Ok(fine)
}

fn numeric_at(spec: &CopulaSpec, n: usize) -> MeasureReport {
    let rho = 12.0 * integrate_square(n, |u, v| spec.eval(u, v)) - 3.0;
    let tau = 1.0 - 4.0 * integrate_square(n, |u, v| spec.partial_u(u, v) * spec.partial_v(u, v));
    let beta = 4.0 * spec.eval(0.5, 0.5) - 1.0;
    let gamma = 4.0 * integrate_unit(n, |u| spec.eval(u, u) + spec.eval(u, 1.0 - u) - u);
    MeasureReport {
        rho,
        tau,
        beta,
        gamma,
        method: Method::Quadrature,
        resolution: Some(n),
    }
}

/// Outcome of a quadrature evaluation that did not pass the Richardson check.
#[derive(Debug, Clone, PartialEq)]
pub struct Unconverged {
    pub report: MeasureReport,
    pub delta: f64,
}

/// All four measures by quadrature at resolution `n` (rounded up to even,
/// at least 64), checked against resolution `2n`.
pub fn measures_numeric(spec: &CopulaSpec, n: usize) -> std::result::Result<MeasureReport, Unconverged> {
    let n = n.max(64).next_multiple_of(2);
    let report = numeric_at(spec, n);
    let check = numeric_at(spec, 2 * n);
    let delta = report
        .components()
        .iter()
        .zip(check.components())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    if delta > CONVERGENCE_TOL {
        Err(Unconverged { report, delta })
    } else {
        Ok(report)
    }
}

/// Tail coefficients from the diagonal at distance `u_probe` from each corner.
pub fn tail_numeric(spec: &CopulaSpec, u_probe: f64) -> Result<TailCoefficients> {
    if !(u_probe > 0.0 && u_probe < 0.5) {
        return Err(Error::OutOfRange {
            name: "u_probe",
            value: u_probe,
            lo: 0.0,
            hi: 0.5,
        });
    }
    let lo = u_probe;
    let hi = 1.0 - u_probe;
    Ok(TailCoefficients {
        lambda_lower: spec.eval(lo, lo) / lo,
        lambda_upper: (1.0 - 2.0 * hi + spec.eval(hi, hi)) / (1.0 - hi),
    })
}

/// Closed-form measures for any family; perturbed specs recurse into their
/// base and take the tau factor from [`tau_cross_integral`] at resolution `n`.
pub fn measures_closed(spec: &CopulaSpec, n: usize) -> Result<MeasureReport> {
    Ok(match spec {
        CopulaSpec::Product => MeasureReport::closed(0.0, 0.0, 0.0, 0.0),
        CopulaSpec::Fgm { theta } => {
            let t = theta.get();
            MeasureReport::closed(t / 3.0, 2.0 * t / 9.0, t / 4.0, 4.0 * t / 15.0)
        }
        CopulaSpec::FrechetUpper => MeasureReport::closed(1.0, 1.0, 1.0, 1.0),
        CopulaSpec::FrechetLower => MeasureReport::closed(-1.0, -1.0, -1.0, -1.0),
        CopulaSpec::Bound { theta } => measures_bound_closed(*theta),
        CopulaSpec::Perturbed { base, alpha } => {
            let inner = measures_closed(base, n)?;
            measures_perturbed_closed(&inner, *alpha, tau_cross_integral(base, n)?)
        }
    })
}

pub fn tail_closed(spec: &CopulaSpec) -> TailCoefficients {
    match spec {
        CopulaSpec::Product | CopulaSpec::Fgm { .. } | CopulaSpec::FrechetLower => TailCoefficients {
            lambda_lower: 0.0,
            lambda_upper: 0.0,
        },
        CopulaSpec::FrechetUpper => TailCoefficients {
            lambda_lower: 1.0,
            lambda_upper: 1.0,
        },
        CopulaSpec::Bound { theta } => tail_bound_closed(*theta),
        CopulaSpec::Perturbed { base, alpha } => tail_perturbed_closed(&tail_closed(base), *alpha),
    }
}
