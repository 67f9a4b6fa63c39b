//! Inverse-transform sampling of the minimum service time.

use crate::error::{Error, Result};
use crate::queueing::MinServiceLaw;

/// Target accuracy `|F(x) - p|` of a numeric inversion.
pub const INVERSION_TOL: f64 = 1e-10;

/// Points used in the monotonicity scan of a law before sampling.
pub const SCAN_POINTS: usize = 10_000;

/// Smallest `x >= lower` with `cdf(x)` within [`INVERSION_TOL`] of `p`, found by
/// doubling a bracket of initial width `scale` and bisecting.
pub fn invert_cdf<F: Fn(f64) -> f64>(cdf: F, lower: f64, scale: f64, p: f64) -> f64 {
    let mut lo = lower;
    let mut span = scale;
    let mut hi = lower + span;
    while cdf(hi) < p {
        lo = hi;
        span *= 2.0;
        hi = lower + span;
        if !hi.is_finite() {
            return lo;
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let f = cdf(mid);
        if (f - p).abs() <= INVERSION_TOL || mid <= lo || mid >= hi {
            return mid;
        }
        if f < p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// A min-service law that passed the distribution-function checks.
#[derive(Debug, Clone, Copy)]
pub struct MinServiceSampler {
    law: MinServiceLaw,
    scale: f64,
}

impl MinServiceSampler {
    /// Rejects laws whose distribution function does not start at zero, is
    /// not nondecreasing, or leaves `[0, 1]` on the support.
    pub fn new(law: MinServiceLaw) -> Result<Self> {
        let lo = law.support_lower;
        let start = law.cdf(lo);
        if start.abs() > 1e-12 {
            return Err(Error::NotSamplable(format!(
                "{} law at theta={} has F at the support start equal to {start}",
                law.variant.as_str(),
                law.theta
            )));
        }
        let hi = law.support_upper();
        let mut prev = start;
        for i in 1..=SCAN_POINTS {
            let x = lo + (hi - lo) * i as f64 / SCAN_POINTS as f64;
            let f = law.cdf(x);
            if f < prev - 1e-12 || f > 1.0 + 1e-12 {
                return Err(Error::NotSamplable(format!(
                    "{} law at theta={} is not a distribution function near x={x}",
                    law.variant.as_str(),
                    law.theta
                )));
            }
            prev = f;
        }
        Ok(Self {
            law,
            scale: 1.0 / law.service.mu(),
        })
    }

    pub fn law(&self) -> &MinServiceLaw {
        &self.law
    }

    /// Service time for a uniform draw in `(0, 1)`.
    pub fn sample(&self, draw: f64) -> f64 {
        invert_cdf(|x| self.law.cdf(x), self.law.support_lower, self.scale, draw)
    }
}

/// One-shot form of [`MinServiceSampler`]; checks the law on every call.
pub fn sample_min_service(law: &MinServiceLaw, draw: f64) -> Result<f64> {
    if !(draw > 0.0 && draw < 1.0) {
        return Err(Error::OutOfRange {
            name: "draw",
            value: draw,
            lo: 0.0,
            hi: 1.0,
        });
    }
    Ok(MinServiceSampler::new(*law)?.sample(draw))
}
