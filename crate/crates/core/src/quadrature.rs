//! Numerical integration used by the measures and the queueing moments.
//!
//! The 2-D rule splits each cell of an `n x n` grid into four triangles along
//! both cell diagonals. With `n` even, the lines `u = v` and `u + v = 1` run
//! exactly along cell diagonals, so every integrand in this crate is smooth
//! inside each triangle. Each triangle uses the 3-point interior rule, exact
//! for quadratics; no node ever lies on a kink line.

use rayon::prelude::*;

/// Pairwise (tree) summation; the result depends only on the input order.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    const LEAF: usize = 32;
    if values.len() <= LEAF {
        return values.iter().sum();
    }
    let (a, b) = values.split_at(values.len() / 2);
    pairwise_sum(a) + pairwise_sum(b)
}

const BARY_MAJOR: f64 = 2.0 / 3.0;
const BARY_MINOR: f64 = 1.0 / 6.0;

/// `integral over [0,1]^2 of f`, by the triangle-split rule on an `n x n` grid.
///
/// Rows are evaluated in parallel and combined by pairwise summation, so the
/// result is identical for every worker count.
pub fn integrate_square<F>(n: usize, f: F) -> f64
where
    F: Fn(f64, f64) -> f64 + Sync,
{
    let h = 1.0 / n as f64;
    let tri_weight = h * h / 4.0 / 3.0;
    let rows: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|j| {
            let v0 = j as f64 * h;
            let mut cells = Vec::with_capacity(n);
            for i in 0..n {
                let u0 = i as f64 * h;
                let c = (u0 + 0.5 * h, v0 + 0.5 * h);
                let corners = [(u0, v0), (u0 + h, v0), (u0 + h, v0 + h), (u0, v0 + h)];
                let mut acc = 0.0;
                for k in 0..4 {
                    let a = corners[k];
                    let b = corners[(k + 1) % 4];
                    let tri = [c, a, b];
                    for major in 0..3 {
                        let mut pu = 0.0;
                        let mut pv = 0.0;
                        for (idx, vertex) in tri.iter().enumerate() {
                            let w = if idx == major { BARY_MAJOR } else { BARY_MINOR };
                            pu += w * vertex.0;
                            pv += w * vertex.1;
                        }
                        acc += f(pu, pv);
                    }
                }
                cells.push(acc * tri_weight);
            }
            pairwise_sum(&cells)
        })
        .collect();
    pairwise_sum(&rows)
}

/// Sum of `g(cell centre) * m(cell)` over the `n x n` grid, where `m` is a
/// per-cell mass supplied as a function of the cell bounds.
pub fn stieltjes_square<G, M>(n: usize, g: G, mass: M) -> f64
where
    G: Fn(f64, f64) -> f64 + Sync,
    M: Fn(f64, f64, f64, f64) -> f64 + Sync,
{
    let h = 1.0 / n as f64;
    let rows: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|j| {
            let v1 = j as f64 * h;
            let v2 = if j + 1 == n { 1.0 } else { (j + 1) as f64 * h };
            let cells: Vec<f64> = (0..n)
                .map(|i| {
                    let u1 = i as f64 * h;
                    let u2 = if i + 1 == n { 1.0 } else { (i + 1) as f64 * h };
                    g(0.5 * (u1 + u2), 0.5 * (v1 + v2)) * mass(u1, u2, v1, v2)
                })
                .collect();
            pairwise_sum(&cells)
        })
        .collect();
    pairwise_sum(&rows)
}

/// Composite two-point Gauss–Legendre rule on `[0, 1]` with `n` cells.
pub fn integrate_unit<F: Fn(f64) -> f64>(n: usize, f: F) -> f64 {
    let h = 1.0 / n as f64;
    let off = 0.5 * h / 3f64.sqrt();
    let cells: Vec<f64> = (0..n)
        .map(|i| {
            let mid = (i as f64 + 0.5) * h;
            0.5 * h * (f(mid - off) + f(mid + off))
        })
        .collect();
    pairwise_sum(&cells)
}

// Gauss–Kronrod 7/15 nodes and weights on [-1, 1].
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_728,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let hw = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for k in 0..7 {
        let x = hw * XGK[k];
        let s = f(c - x) + f(c + x);
        kronrod += WGK[k] * s;
        if k % 2 == 1 {
            gauss += WG[k / 2] * s;
        }
    }
    (kronrod * hw, ((kronrod - gauss) * hw).abs())
}

/// Adaptive Gauss–Kronrod integration of `f` over `[a, b]`, with the listed
/// interior `breaks` forced as subdivision points.
pub fn adaptive<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, breaks: &[f64], abs_tol: f64) -> f64 {
    let mut points = vec![a];
    points.extend(breaks.iter().copied().filter(|&x| a < x && x < b));
    points.push(b);
    points.sort_by(f64::total_cmp);

    let mut pieces: Vec<(f64, f64, f64, f64)> = points
        .windows(2)
        .map(|w| {
            let (val, err) = gk15(&f, w[0], w[1]);
            (w[0], w[1], val, err)
        })
        .collect();
    for _ in 0..2000 {
        let total_err: f64 = pieces.iter().map(|p| p.3).sum();
        if total_err <= abs_tol {
            break;
        }
        let (worst, _) = pieces
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .expect("at least one piece");
        let (lo, hi, _, _) = pieces.swap_remove(worst);
        let mid = 0.5 * (lo + hi);
        for (l, r) in [(lo, mid), (mid, hi)] {
            let (val, err) = gk15(&f, l, r);
            pieces.push((l, r, val, err));
        }
    }
    pieces.sort_by(|x, y| x.0.total_cmp(&y.0));
    let values: Vec<f64> = pieces.iter().map(|p| p.2).collect();
    pairwise_sum(&values)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn square_rule_is_exact_for_piecewise_quadratics() {
        let min_int = integrate_square(16, |u, v| u.min(v));
        assert!((min_int - 1.0 / 3.0).abs() < 1e-14);
        let w_int = integrate_square(16, |u, v| (u + v - 1.0).max(0.0));
        assert!((w_int - 1.0 / 6.0).abs() < 1e-14);
        let uv = integrate_square(8, |u, v| u * v);
        assert!((uv - 0.25).abs() < 1e-14);
    }

    #[test]
    fn square_rule_on_indicators_of_halves() {
        let area = integrate_square(10, |u, v| if u + v >= 1.0 { 1.0 } else { 0.0 });
        assert!((area - 0.5).abs() < 1e-14);
        let cross = integrate_square(10, |u, v| if u <= v && u + v >= 1.0 { 1.0 } else { 0.0 });
        assert!((cross - 0.25).abs() < 1e-14);
    }

    #[test]
    fn unit_rule_handles_aligned_kink() {
        let v = integrate_unit(64, |u| (2.0 * u - 1.0).max(0.0));
        assert!((v - 0.25).abs() < 1e-14);
    }

    #[test]
    fn adaptive_integrates_exponential_tail() {
        let v = adaptive(|x| (-x).exp(), 0.0, 50.0, &[1.0], 1e-12);
        assert!((v - (1.0 - (-50f64).exp())).abs() < 1e-12);
        let v = adaptive(|x| x.sqrt(), 0.0, 1.0, &[], 1e-10);
        assert!((v - 2.0 / 3.0).abs() < 1e-9);
    }

    #[test]
    fn pairwise_matches_naive_on_small_input() {
        let xs: Vec<f64> = (0..1000).map(|i| i as f64 * 0.001).collect();
        let naive: f64 = xs.iter().sum();
        assert!((pairwise_sum(&xs) - naive).abs() < 1e-9);
    }
}
