//! Numerical check of the copula axioms: uniform margins and nonnegative
//! C-volume on grid cells, seeded random rectangles and thin probes that
//! straddle the two diagonals.
//!
//! A uniform grid alone can miss negative mass concentrated on a line: the
//! volume of a thin straddling rectangle shrinks like its width while its area
//! shrinks like the width squared. The probe family covers that regime.

use std::cmp::Ordering;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::copula::{CopulaSpec, Rectangle};

/// Default tolerance for boundary errors and negative volume.
pub const VOLUME_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    #[serde(rename = "PASS")]
    Pass,
    #[serde(rename = "FAIL_BOUNDARY")]
    FailBoundary,
    #[serde(rename = "FAIL_VOLUME")]
    FailVolume,
}

impl Verdict {
    /// Process exit code used by the command-line front end.
    pub fn exit_code(self) -> i32 {
        match self {
            Verdict::Pass => 0,
            Verdict::FailVolume => 3,
            Verdict::FailBoundary => 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub boundary_max_error: f64,
    pub margin_monotone: bool,
    pub min_volume: f64,
    pub witness: Rectangle,
    pub same_region_min_volume: f64,
    pub grid_resolution: usize,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValidationOptions {
    pub grid: usize,
    pub extra_random: usize,
    pub seed: u64,
    pub diagonal_probes: bool,
    pub tolerance: f64,
}

impl ValidationOptions {
    pub fn new(grid: usize, extra_random: usize, seed: u64) -> Self {
        Self {
            grid,
            extra_random,
            seed,
            diagonal_probes: true,
            tolerance: VOLUME_TOL,
        }
    }
}

/// Maximum margin error over `n + 1` grid points, and whether `C` is
/// nondecreasing in each argument along every grid line.
pub fn check_boundaries(spec: &CopulaSpec, n: usize) -> (f64, bool) {
    let n = n.max(2);
    let grid: Vec<f64> = (0..=n).map(|i| i as f64 / n as f64).collect();
    let boundary_max_error = grid
        .iter()
        .map(|&t| {
            [
                spec.eval(t, 0.0).abs(),
                spec.eval(0.0, t).abs(),
                (spec.eval(t, 1.0) - t).abs(),
                (spec.eval(1.0, t) - t).abs(),
            ]
            .into_iter()
            .fold(0.0, f64::max)
        })
        .fold(0.0, f64::max);

    let margin_monotone = grid.par_iter().all(|&line| {
        grid.windows(2).all(|w| {
            spec.eval(w[1], line) >= spec.eval(w[0], line) - VOLUME_TOL
                && spec.eval(line, w[1]) >= spec.eval(line, w[0]) - VOLUME_TOL
        })
    });
    (boundary_max_error, margin_monotone)
}

fn region(u: f64, v: f64) -> (bool, bool) {
    (u <= v, u + v <= 1.0)
}

/// All four corners in the same one of the regions
/// `{u <= v, u > v} x {u + v <= 1, u + v > 1}`.
pub fn same_region(r: &Rectangle) -> bool {
    let first = region(r.u1, r.v1);
    r.corners().iter().all(|&(u, v)| region(u, v) == first)
}

/// The rectangle has corners strictly on both sides of `u + v = 1`.
pub fn straddles_anti_diagonal(r: &Rectangle) -> bool {
    r.u1 + r.v1 < 1.0 && r.u2 + r.v2 > 1.0
}

#[derive(Debug, Clone, Copy)]
struct Extremes {
    min_volume: f64,
    witness: Rectangle,
    same_region_min: f64,
}

fn lex_key(r: &Rectangle) -> [f64; 4] {
    [r.u1, r.u2, r.v1, r.v2]
}

fn lex_cmp(a: &Rectangle, b: &Rectangle) -> Ordering {
    lex_key(a)
        .iter()
        .zip(lex_key(b).iter())
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| o.is_ne())
        .unwrap_or(Ordering::Equal)
}

impl Extremes {
    fn of(spec: &CopulaSpec, r: Rectangle) -> Self {
        let vol = spec.volume_raw(r.u1, r.u2, r.v1, r.v2);
        Self {
            min_volume: vol,
            witness: r,
            same_region_min: if same_region(&r) { vol } else { f64::INFINITY },
        }
    }

    fn empty() -> Self {
        Self {
            min_volume: f64::INFINITY,
            witness: Rectangle {
                u1: 0.0,
                u2: 1.0,
                v1: 0.0,
                v2: 1.0,
            },
            same_region_min: f64::INFINITY,
        }
    }

    // Commutative and associative, so any reduction order gives the same result.
    fn merge(self, other: Self) -> Self {
        let pick_self = match self.min_volume.total_cmp(&other.min_volume) {
            Ordering::Less => true,
            Ordering::Greater => false,
            Ordering::Equal => lex_cmp(&self.witness, &other.witness).is_le(),
        };
        let (min_volume, witness) = if pick_self {
            (self.min_volume, self.witness)
        } else {
            (other.min_volume, other.witness)
        };
        Self {
            min_volume,
            witness,
            same_region_min: self.same_region_min.min(other.same_region_min),
        }
    }
}

fn clipped(u_lo: f64, u_hi: f64, v_lo: f64, v_hi: f64) -> Rectangle {
    Rectangle {
        u1: u_lo.clamp(0.0, 1.0),
        u2: u_hi.clamp(0.0, 1.0),
        v1: v_lo.clamp(0.0, 1.0),
        v2: v_hi.clamp(0.0, 1.0),
    }
}

/// Squares of side `1/n`, `1/n^2` and `1/n^3` centred on `n` points of each
/// diagonal.
fn diagonal_probes(n: usize) -> Vec<Rectangle> {
    let nf = n as f64;
    let widths = [1.0 / nf, 1.0 / (nf * nf), 1.0 / (nf * nf * nf)];
    let mut probes = Vec::with_capacity(6 * n);
    for &w in &widths {
        for k in 0..n {
            let c = (k as f64 + 0.5) / nf;
            let h = 0.5 * w;
            probes.push(clipped(c - h, c + h, c - h, c + h));
            probes.push(clipped(c - h, c + h, 1.0 - c - h, 1.0 - c + h));
        }
    }
    probes
}

fn random_rectangles(count: usize, seed: u64) -> Vec<Rectangle> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let (a, b): (f64, f64) = (rng.random(), rng.random());
            let (c, d): (f64, f64) = (rng.random(), rng.random());
            Rectangle {
                u1: a.min(b),
                u2: a.max(b),
                v1: c.min(d),
                v2: c.max(d),
            }
        })
        .collect()
}

/// Full validation with default options (diagonal probes on, tolerance 1e-12).
pub fn check_volumes(spec: &CopulaSpec, n: usize, extra_random: usize, seed: u64) -> ValidationReport {
    validate(spec, &ValidationOptions::new(n, extra_random, seed))
}

pub fn validate(spec: &CopulaSpec, opts: &ValidationOptions) -> ValidationReport {
    let n = opts.grid.max(2);
    let h = 1.0 / n as f64;
    let edge = |i: usize| if i == n { 1.0 } else { i as f64 * h };

    let grid = (0..n)
        .into_par_iter()
        .map(|j| {
            (0..n)
                .map(|i| {
                    Extremes::of(
                        spec,
                        Rectangle {
                            u1: edge(i),
                            u2: edge(i + 1),
                            v1: edge(j),
                            v2: edge(j + 1),
                        },
                    )
                })
                .fold(Extremes::empty(), Extremes::merge)
        })
        .reduce(Extremes::empty, Extremes::merge);

    let random = random_rectangles(opts.extra_random, opts.seed)
        .into_par_iter()
        .map(|r| Extremes::of(spec, r))
        .reduce(Extremes::empty, Extremes::merge);

    let probes = if opts.diagonal_probes {
        diagonal_probes(n)
            .into_par_iter()
            .map(|r| Extremes::of(spec, r))
            .reduce(Extremes::empty, Extremes::merge)
    } else {
        Extremes::empty()
    };

    let ext = grid.merge(random).merge(probes);
    let (boundary_max_error, margin_monotone) = check_boundaries(spec, n);

    let verdict = if boundary_max_error > opts.tolerance {
        Verdict::FailBoundary
    } else if ext.min_volume < -opts.tolerance {
        Verdict::FailVolume
    } else {
        Verdict::Pass
    };

    ValidationReport {
        boundary_max_error,
        margin_monotone,
        min_volume: ext.min_volume,
        witness: ext.witness,
        // no same-region rectangle at all (tiny grids): fall back to the global minimum
        same_region_min_volume: if ext.same_region_min.is_finite() {
            ext.same_region_min
        } else {
            ext.min_volume
        },
        grid_resolution: n,
        verdict,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn boundary_line_is_exact_for_bound_copula() {
        let spec = CopulaSpec::bound(0.7).unwrap();
        assert!((spec.eval(0.3, 1.0) - 0.3).abs() < 1e-15);
        let (err, _) = check_boundaries(&spec, 50);
        assert!(err < 1e-12);
    }

    #[test]
    fn product_boundaries_are_clean() {
        for n in [2, 10, 100] {
            assert_eq!(check_boundaries(&CopulaSpec::Product, n), (0.0, true));
        }
    }

    #[test]
    fn perturbed_product_margins() {
        let spec = CopulaSpec::perturbed(CopulaSpec::Product, 0.5).unwrap();
        let (err, monotone) = check_boundaries(&spec, 100);
        assert!(err < 1e-12);
        // dC/du = v - alpha/2 just above the anti-diagonal near v = 0
        assert!(!monotone);
    }

    #[test]
    fn frechet_lower_passes() {
        let r = check_volumes(&CopulaSpec::FrechetLower, 200, 1000, 7);
        assert_eq!(r.verdict, Verdict::Pass);
        assert!(r.min_volume >= -1e-12);
    }

    #[test]
    fn comonotone_bound_passes() {
        let r = check_volumes(&CopulaSpec::bound(1.0).unwrap(), 200, 1000, 7);
        assert_eq!(r.verdict, Verdict::Pass);
    }

    #[test]
    fn half_bound_fails_on_anti_diagonal() {
        let r = check_volumes(&CopulaSpec::bound(0.5).unwrap(), 200, 1000, 7);
        assert_eq!(r.verdict, Verdict::FailVolume);
        assert!(r.min_volume <= -1e-4, "{}", r.min_volume);
        assert!(straddles_anti_diagonal(&r.witness));
        assert!(r.same_region_min_volume >= -1e-12);
        assert!(!r.margin_monotone);
    }

    #[test]
    fn probes_can_be_disabled() {
        let mut opts = ValidationOptions::new(20, 0, 1);
        opts.diagonal_probes = false;
        let with = validate(&CopulaSpec::bound(0.5).unwrap(), &ValidationOptions::new(20, 0, 1));
        let without = validate(&CopulaSpec::bound(0.5).unwrap(), &opts);
        assert!(with.min_volume <= without.min_volume);
    }

    #[test]
    fn merge_is_order_independent() {
        let spec = CopulaSpec::bound(0.5).unwrap();
        let items: Vec<Extremes> = random_rectangles(200, 3)
            .into_iter()
            .map(|r| Extremes::of(&spec, r))
            .collect();
        let fwd = items.iter().copied().fold(Extremes::empty(), Extremes::merge);
        let rev = items.iter().rev().copied().fold(Extremes::empty(), Extremes::merge);
        assert_eq!(fwd.witness, rev.witness);
        assert_eq!(fwd.min_volume, rev.min_volume);
    }

    #[test]
    fn region_classification() {
        assert!(same_region(&Rectangle::new(0.1, 0.2, 0.3, 0.4).unwrap()));
        assert!(!same_region(&Rectangle::new(0.1, 0.5, 0.3, 0.4).unwrap()));
        assert!(straddles_anti_diagonal(&Rectangle::new(0.4, 0.41, 0.59, 0.61).unwrap()));
        assert!(!straddles_anti_diagonal(&Rectangle::new(0.1, 0.2, 0.1, 0.2).unwrap()));
    }
}
