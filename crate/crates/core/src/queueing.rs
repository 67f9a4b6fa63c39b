//! Mean waiting time and mean total service effort of an M/G/1 system in
//! which every task is replicated on two servers and the slower copy is
//! cancelled when the faster one finishes.
//!
//! The waiting time has the law of an M/G/1 queue whose service time is
//! `min(S1, S2)`, and the total effort of both servers is `2 E[min]`. The pair
//! `(S1, S2)` shares one marginal law and is coupled by the bound copula, so
//! the minimum has distribution function `F(x) = 2u - C(u, u)` with
//! `u = F_S(x)`.
//!
//! Two variants are offered. [`Variant::PaperFormula`] replaces
//! `max(2u - 1, 0)` by `2u - 1` over the whole support and integrates the
//! resulting density termwise. [`Variant::ExactPiecewise`] keeps the true
//! piecewise diagonal and integrates the survival function numerically.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::copula::{BoundWeights, CopulaSpec, DependenceParam};
use crate::error::{Error, Result};
use crate::quadrature::adaptive;
use crate::sampling::invert_cdf;

/// Absolute tolerance for the adaptive moment integrals.
pub const MOMENT_TOL: f64 = 1e-9;

/// Survival level below which the moment integrals are truncated.
pub const SURVIVAL_CUTOFF: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ServiceModel {
    /// Density `mu exp(-mu (x - delta))` on `x >= delta`.
    ShiftedExponential { mu: f64, delta: f64 },
    /// Two-stage equal-rate law, density `mu^2 x exp(-mu x)`.
    HypoExponential { mu: f64 },
}

impl ServiceModel {
    pub fn shifted_exponential(mu: f64, delta: f64) -> Result<Self> {
        if !(mu.is_finite() && mu > 0.0) {
            return Err(Error::InvalidConfig(format!("rate mu must be positive, got {mu}")));
        }
        if !(delta.is_finite() && delta >= 0.0) {
            return Err(Error::InvalidConfig(format!(
                "shift delta must be nonnegative, got {delta}"
            )));
        }
        Ok(Self::ShiftedExponential { mu, delta })
    }

    pub fn hypo_exponential(mu: f64) -> Result<Self> {
        if !(mu.is_finite() && mu > 0.0) {
            return Err(Error::InvalidConfig(format!("rate mu must be positive, got {mu}")));
        }
        Ok(Self::HypoExponential { mu })
    }

    pub fn mu(&self) -> f64 {
        match *self {
            Self::ShiftedExponential { mu, .. } | Self::HypoExponential { mu } => mu,
        }
    }

    pub fn support_lower(&self) -> f64 {
        match *self {
            Self::ShiftedExponential { delta, .. } => delta,
            Self::HypoExponential { .. } => 0.0,
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        match *self {
            Self::ShiftedExponential { mu, delta } => {
                if x <= delta {
                    0.0
                } else {
                    -(-mu * (x - delta)).exp_m1()
                }
            }
            Self::HypoExponential { mu } => {
                if x <= 0.0 {
                    0.0
                } else {
                    1.0 - (-mu * x).exp() * (1.0 + mu * x)
                }
            }
        }
    }

    pub fn pdf(&self, x: f64) -> f64 {
        match *self {
            Self::ShiftedExponential { mu, delta } => {
                if x < delta {
                    0.0
                } else {
                    mu * (-mu * (x - delta)).exp()
                }
            }
            Self::HypoExponential { mu } => {
                if x < 0.0 {
                    0.0
                } else {
                    mu * mu * x * (-mu * x).exp()
                }
            }
        }
    }

    pub fn quantile(&self, p: f64) -> f64 {
        match *self {
            Self::ShiftedExponential { mu, delta } => delta - (-p).ln_1p() / mu,
            Self::HypoExponential { mu } => invert_cdf(|x| self.cdf(x), 0.0, 1.0 / mu, p),
        }
    }

    /// `(E[X], E[X^2])` of one service time.
    pub fn moments(&self) -> (f64, f64) {
        match *self {
            Self::ShiftedExponential { mu, delta } => {
                (delta + 1.0 / mu, delta * delta + 2.0 * delta / mu + 2.0 / (mu * mu))
            }
            Self::HypoExponential { mu } => (2.0 / mu, 6.0 / (mu * mu)),
        }
    }

    /// `(E[m], E[m^2])` for `m` the minimum of two independent copies.
    pub fn independent_min_moments(&self) -> (f64, f64) {
        match *self {
            Self::ShiftedExponential { mu, delta } => (
                delta + 1.0 / (2.0 * mu),
                delta * delta + delta / mu + 1.0 / (2.0 * mu * mu),
            ),
            Self::HypoExponential { mu } => (5.0 / (4.0 * mu), 9.0 / (4.0 * mu * mu)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    PaperFormula,
    ExactPiecewise,
}

impl Variant {
    pub fn as_str(&self) -> &'static str {
        match self {
            Variant::PaperFormula => "paper_formula",
            Variant::ExactPiecewise => "exact_piecewise",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemSpec {
    pub arrival_rate: f64,
    pub service: ServiceModel,
    pub theta: DependenceParam,
    pub variant: Variant,
}

impl SystemSpec {
    pub fn new(arrival_rate: f64, service: ServiceModel, theta: f64, variant: Variant) -> Result<Self> {
        if !(arrival_rate.is_finite() && arrival_rate > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "arrival rate must be positive, got {arrival_rate}"
            )));
        }
        Ok(Self {
            arrival_rate,
            service,
            theta: DependenceParam::new(theta)?,
            variant,
        })
    }

    pub fn min_law(&self) -> MinServiceLaw {
        min_law(self.service, self.theta, self.variant)
    }
}

/// Law of `min(S1, S2)` for a bound-copula coupled pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MinServiceLaw {
    pub service: ServiceModel,
    pub theta: DependenceParam,
    pub variant: Variant,
    pub support_lower: f64,
    pub m1: f64,
    pub m2: f64,
}

impl MinServiceLaw {
    fn weights(&self) -> BoundWeights {
        BoundWeights::new(self.theta.get())
    }

    fn cdf_of_level(&self, u: f64) -> f64 {
        match self.variant {
            Variant::ExactPiecewise => {
                let diag = CopulaSpec::Bound { theta: self.theta }.eval(u, u);
                2.0 * u - diag
            }
            Variant::PaperFormula => {
                let k = self.weights();
                2.0 * u - (k.pi * u * u + k.m * u - k.w * (2.0 * u - 1.0))
            }
        }
    }

    /// Distribution function. Below the support it is zero; on the support the
    /// raw formula is returned (the formula variant need not start at zero).
    pub fn cdf(&self, x: f64) -> f64 {
        if x < self.support_lower {
            return 0.0;
        }
        self.cdf_of_level(self.service.cdf(x))
    }

    pub fn survival(&self, x: f64) -> f64 {
        1.0 - self.cdf(x)
    }

    pub fn pdf(&self, x: f64) -> f64 {
        if x < self.support_lower {
            return 0.0;
        }
        let u = self.service.cdf(x);
        let k = self.weights();
        let slope = match self.variant {
            Variant::PaperFormula => 2.0 - 2.0 * k.pi * u - k.m + 2.0 * k.w,
            Variant::ExactPiecewise => {
                let w = if u >= 0.5 { 2.0 * k.w } else { 0.0 };
                2.0 - 2.0 * k.pi * u - k.m + w
            }
        };
        slope * self.service.pdf(x)
    }

    /// A point beyond which `|survival|` stays below [`SURVIVAL_CUTOFF`].
    pub fn support_upper(&self) -> f64 {
        let lo = self.support_lower;
        let mut span = 1.0 / self.service.mu();
        while self.survival(lo + span).abs() >= SURVIVAL_CUTOFF || self.service.cdf(lo + span) < 1.0 - SURVIVAL_CUTOFF {
            span *= 2.0;
            if span > 1e6 / self.service.mu() {
                break;
            }
        }
        lo + span
    }
}

fn exact_moments(law: &MinServiceLaw) -> (f64, f64) {
    let lo = law.support_lower;
    let hi = law.support_upper();
    let kink = [law.service.quantile(0.5)];
    let m1 = lo + adaptive(|x| law.survival(x), lo, hi, &kink, MOMENT_TOL);
    let m2 = lo * lo + adaptive(|x| 2.0 * x * law.survival(x), lo, hi, &kink, MOMENT_TOL);
    (m1, m2)
}

/// Termwise integral of `x^k` against the formula variant's density:
/// `lambda(theta) E[X^k] + (1 - theta^2) E[min_indep^k]`.
fn paper_moments(service: &ServiceModel, theta: f64) -> (f64, f64) {
    let k = BoundWeights::new(theta);
    let (x1, x2) = service.moments();
    let (i1, i2) = service.independent_min_moments();
    (k.m * x1 + k.pi * i1, k.m * x2 + k.pi * i2)
}

pub fn min_law(service: ServiceModel, theta: DependenceParam, variant: Variant) -> MinServiceLaw {
    let mut law = MinServiceLaw {
        service,
        theta,
        variant,
        support_lower: service.support_lower(),
        m1: 0.0,
        m2: 0.0,
    };
    let (m1, m2) = match variant {
        Variant::PaperFormula => paper_moments(&service, theta.get()),
        Variant::ExactPiecewise => exact_moments(&law),
    };
    law.m1 = m1;
    law.m2 = m2;
    law
}

/// Pollaczek–Khinchine mean wait `lambda m2 / (2 (1 - lambda m1))`.
pub fn pk_waiting(lambda: f64, m1: f64, m2: f64) -> Result<f64> {
    let utilization = lambda * m1;
    if utilization.is_nan() || utilization >= 1.0 {
        return Err(Error::Unstable { utilization });
    }
    Ok(lambda * m2 / (2.0 * (1.0 - utilization)))
}

/// Total effort of both servers per task.
pub fn mean_total_service(m1: f64) -> f64 {
    2.0 * m1
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub theta: f64,
    /// `None` when the row is unstable.
    pub ew: Option<f64>,
    pub es: f64,
    pub variant: Variant,
    pub stable: bool,
}

/// One row per `theta`, in input order.
pub fn sweep_theta(
    arrival_rate: f64,
    service: ServiceModel,
    variant: Variant,
    thetas: &[f64],
) -> Result<Vec<SweepRow>> {
    let params = thetas
        .iter()
        .map(|&t| DependenceParam::new(t))
        .collect::<Result<Vec<_>>>()?;
    Ok(params
        .par_iter()
        .map(|&theta| {
            let law = min_law(service, theta, variant);
            let ew = pk_waiting(arrival_rate, law.m1, law.m2).ok();
            SweepRow {
                theta: theta.get(),
                ew,
                es: mean_total_service(law.m1),
                variant,
                stable: ew.is_some(),
            }
        })
        .collect())
}

/// Round half-up to `digits` decimals, for presentation only.
pub fn round_half_up(x: f64, digits: u32) -> f64 {
    let scale = 10f64.powi(digits as i32);
    let scaled = x * scale;
    let floor = scaled.floor();
    let frac = scaled - floor;
    // treat representation error on an exact half as the half itself
    let up = frac >= 0.5 - 1e-9 * scaled.abs().max(1.0);
    (if up { floor + 1.0 } else { floor }) / scale
}

#[cfg(test)]
mod tests {
    use super::*;

    fn theta(t: f64) -> DependenceParam {
        DependenceParam::new(t).unwrap()
    }

    fn shifted() -> ServiceModel {
        ServiceModel::shifted_exponential(0.5, 1.0).unwrap()
    }

    fn hypo() -> ServiceModel {
        ServiceModel::hypo_exponential(0.5).unwrap()
    }

    #[test]
    fn independent_case_moments() {
        for variant in [Variant::PaperFormula, Variant::ExactPiecewise] {
            let law = min_law(shifted(), theta(0.0), variant);
            assert!((law.m1 - 2.0).abs() < 1e-10, "{variant:?} {}", law.m1);
            assert!((law.m2 - 5.0).abs() < 1e-10, "{variant:?} {}", law.m2);
            let law = min_law(hypo(), theta(0.0), variant);
            assert!((law.m1 - 2.5).abs() < 1e-10, "{variant:?} {}", law.m1);
            assert!((law.m2 - 9.0).abs() < 1e-10, "{variant:?} {}", law.m2);
        }
    }

    #[test]
    fn formula_variant_polynomials_at_reference_parameters() {
        for t in [-1.0, -0.5, -0.2, 0.1, 0.3, 0.5, 0.8, 1.0] {
            let law = min_law(shifted(), theta(t), Variant::PaperFormula);
            let m1 = 2.0 + 0.75 * t - 0.5 * t * t + 0.75 * t.powi(3);
            let m2 = 5.0 + 3.25 * t + 1.5 * t * t + 3.25 * t.powi(3);
            assert!((law.m1 - m1).abs() < 1e-12 && (law.m2 - m2).abs() < 1e-12, "theta {t}");

            let law = min_law(hypo(), theta(t), Variant::PaperFormula);
            let m1 = 2.5 + t - 0.5 * t * t + t.powi(3);
            let m2 = 9.0 + 6.0 * t + 3.0 * t * t + 6.0 * t.powi(3);
            assert!((law.m1 - m1).abs() < 1e-12 && (law.m2 - m2).abs() < 1e-12, "theta {t}");
        }
    }

    #[test]
    fn moments_scale_with_the_rate() {
        // with no shift, time scales as 1/mu
        for variant in [Variant::PaperFormula, Variant::ExactPiecewise] {
            for &t in &[-1.0, 0.2, 0.7] {
                let a = min_law(ServiceModel::hypo_exponential(0.5).unwrap(), theta(t), variant);
                let b = min_law(ServiceModel::hypo_exponential(2.0).unwrap(), theta(t), variant);
                assert!((a.m1 - 4.0 * b.m1).abs() < 1e-8, "{variant:?} {t}");
                assert!((a.m2 - 16.0 * b.m2).abs() < 1e-7, "{variant:?} {t}");
            }
        }
    }

    #[test]
    fn comonotone_min_is_the_marginal() {
        let law = min_law(shifted(), theta(1.0), Variant::PaperFormula);
        assert!((law.m1 - 3.0).abs() < 1e-12);
        let law = min_law(shifted(), theta(1.0), Variant::ExactPiecewise);
        assert!((law.m1 - 3.0).abs() < 1e-9);
        assert!((law.m2 - 13.0).abs() < 1e-8);
    }

    #[test]
    fn exact_moments_match_signed_mixture() {
        // min-law moments as (1-θ²)·independent + m·comonotone - w·countermonotone,
        // with the countermonotone minimum in closed form for the shifted exponential
        let (mu, delta) = (0.5, 1.0);
        let ln2 = std::f64::consts::LN_2;
        let w1 = delta + (1.0 - ln2) / mu;
        let w2 = delta * delta + 2.0 * delta * (1.0 - ln2) / mu + 2.0 * (1.0 - ln2 - 0.5 * ln2 * ln2) / (mu * mu);
        for t in [-1.0, -0.3, 0.2, 0.5, 0.9] {
            let k = BoundWeights::new(t);
            let m1 = k.pi * 2.0 + k.m * 3.0 - k.w * w1;
            let m2 = k.pi * 5.0 + k.m * 13.0 - k.w * w2;
            let law = min_law(shifted(), theta(t), Variant::ExactPiecewise);
            assert!((law.m1 - m1).abs() < 1e-8, "theta {t}: {} vs {m1}", law.m1);
            assert!((law.m2 - m2).abs() < 1e-8, "theta {t}: {} vs {m2}", law.m2);
            assert!(law.m2 >= law.m1 * law.m1);
        }
    }

    #[test]
    fn formula_variant_cdf_is_negative_at_support_start_for_positive_theta() {
        let law = min_law(shifted(), theta(0.5), Variant::PaperFormula);
        assert!((law.cdf(1.0) + 0.03125).abs() < 1e-15);
        let law = min_law(shifted(), theta(0.5), Variant::ExactPiecewise);
        assert_eq!(law.cdf(1.0), 0.0);
    }

    #[test]
    fn formula_variant_density_negative_near_top_for_negative_theta() {
        let law = min_law(shifted(), theta(-0.5), Variant::PaperFormula);
        // slope in u at u -> 1
        let x = 60.0;
        let slope = law.pdf(x) / law.service.pdf(x);
        assert!((slope + 0.03125).abs() < 1e-9, "{slope}");
    }

    #[test]
    fn pdf_is_derivative_of_cdf() {
        for variant in [Variant::PaperFormula, Variant::ExactPiecewise] {
            for model in [shifted(), hypo()] {
                let law = min_law(model, theta(0.4), variant);
                for x in [1.3, 2.0, 4.5, 9.0] {
                    let h = 1e-6;
                    let fd = (law.cdf(x + h) - law.cdf(x - h)) / (2.0 * h);
                    assert!((fd - law.pdf(x)).abs() < 1e-7, "{variant:?} at {x}");
                }
            }
        }
    }

    #[test]
    fn pk_examples() {
        assert_eq!(pk_waiting(0.25, 2.0, 5.0).unwrap(), 1.25);
        assert!((pk_waiting(0.125, 2.5, 9.0).unwrap() - 0.818181818181818).abs() < 1e-12);
        assert_eq!(pk_waiting(0.7, 1.0, 0.0).unwrap(), 0.0);
        match pk_waiting(0.5, 2.0, 5.0) {
            Err(Error::Unstable { utilization }) => assert_eq!(utilization, 1.0),
            other => panic!("expected instability, got {other:?}"),
        }
    }

    #[test]
    fn pk_is_monotone() {
        let base = pk_waiting(0.2, 2.0, 5.0).unwrap();
        assert!(pk_waiting(0.2, 2.0, 6.0).unwrap() > base);
        assert!(pk_waiting(0.25, 2.0, 5.0).unwrap() > base);
    }

    #[test]
    fn total_service_examples() {
        assert_eq!(mean_total_service(2.0), 4.0);
        assert_eq!(mean_total_service(2.5), 5.0);
        assert_eq!(mean_total_service(0.0), 0.0);
    }

    #[test]
    fn sweep_examples() {
        let rows = sweep_theta(0.25, shifted(), Variant::PaperFormula, &[0.2, -0.5]).unwrap();
        assert_eq!(round_half_up(rows[0].ew.unwrap(), 2), 1.54);
        assert_eq!(round_half_up(rows[0].es, 2), 4.27);
        assert_eq!(round_half_up(rows[1].ew.unwrap(), 2), 0.64);
        assert_eq!(round_half_up(rows[1].es, 2), 2.81);
        let rows = sweep_theta(0.125, hypo(), Variant::PaperFormula, &[0.5]).unwrap();
        assert_eq!(round_half_up(rows[0].ew.unwrap(), 2), 1.35);
        assert_eq!(round_half_up(rows[0].es, 2), 6.0);
    }

    #[test]
    fn sweep_flags_unstable_rows() {
        let rows = sweep_theta(0.4, shifted(), Variant::PaperFormula, &[0.0, 1.0]).unwrap();
        assert!(rows[0].stable && rows[0].ew.is_some());
        assert!(!rows[1].stable && rows[1].ew.is_none());
        assert_eq!(rows[1].theta, 1.0);
        assert!(sweep_theta(0.4, shifted(), Variant::PaperFormula, &[1.5]).is_err());
    }

    #[test]
    fn paper_formula_increases_with_dependence() {
        let grid: Vec<f64> = (0..=10).map(|i| -0.5 + 0.1 * i as f64).collect();
        let rows = sweep_theta(0.25, shifted(), Variant::PaperFormula, &grid).unwrap();
        for w in rows.windows(2) {
            assert!(w[1].ew.unwrap() > w[0].ew.unwrap());
            assert!(w[1].es > w[0].es);
        }
    }

    #[test]
    fn half_up_rounding() {
        assert_eq!(round_half_up(2.8125, 2), 2.81);
        assert_eq!(round_half_up(4.536, 2), 4.54);
        assert_eq!(round_half_up(1.345, 2), 1.35);
        assert_eq!(round_half_up(0.125, 2), 0.13);
        assert_eq!(round_half_up(6.0, 2), 6.0);
    }
}
