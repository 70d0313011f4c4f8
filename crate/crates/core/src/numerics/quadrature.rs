//! Numerical integration.
//!
//! `tanh_sinh_unit` targets integrands on `[0, 1]` with integrable endpoint
//! singularities (powers and logarithms of `u` and `1 - u`), which is the
//! shape of every GλD moment integrand. The integrand receives both `u` and
//! `1 - u` so that values near either endpoint keep full relative precision.
//! `adaptive` is a globally adaptive Gauss–Kronrod (7, 15) rule for smooth
//! integrands on finite intervals.

use std::f64::consts::FRAC_PI_2;

const TANH_SINH_T_MAX: f64 = 6.5;
const TANH_SINH_MAX_LEVEL: u32 = 14;

/// Integrates a vector-valued function over `[0, 1]`.
///
/// `f(u, 1 - u)` must be finite on the open interval. Terminates when two
/// successive step halvings agree to `rel_tol` in every component.
pub fn tanh_sinh_unit<const N: usize, F>(f: F, rel_tol: f64) -> [f64; N]
where
    F: Fn(f64, f64) -> [f64; N],
{
    // Node at parameter t: s = (pi/2) sinh t, u = 1/(1+e^{-2s}), 1-u = 1/(1+e^{2s}),
    // du/dt = pi cosh(t) u (1-u).
    let node = |t: f64| -> Option<(f64, f64, f64)> {
        let s = FRAC_PI_2 * t.sinh();
        let (u, v) = if s >= 0.0 {
            let e = (-2.0 * s).exp();
            (1.0 / (1.0 + e), e / (1.0 + e))
        } else {
            let e = (2.0 * s).exp();
            (e / (1.0 + e), 1.0 / (1.0 + e))
        };
        if u <= 0.0 || v <= 0.0 {
            return None;
        }
        let w = 2.0 * FRAC_PI_2 * t.cosh() * u * v;
        if w == 0.0 || !w.is_finite() {
            return None;
        }
        Some((u, v, w))
    };

    let mut sum = [0.0; N];
    let accumulate = |sum: &mut [f64; N], t: f64| {
        if let Some((u, v, w)) = node(t) {
            let vals = f(u, v);
            for k in 0..N {
                let term = vals[k] * w;
                if term.is_finite() {
                    sum[k] += term;
                }
            }
        }
    };

    // Level 0: integer nodes.
    let mut h = 1.0;
    accumulate(&mut sum, 0.0);
    let mut j = 1.0;
    while j <= TANH_SINH_T_MAX {
        accumulate(&mut sum, j);
        accumulate(&mut sum, -j);
        j += 1.0;
    }
    let mut estimate = sum.map(|s| s * h);

    for level in 1..=TANH_SINH_MAX_LEVEL {
        h *= 0.5;
        let mut t = h;
        while t <= TANH_SINH_T_MAX {
            accumulate(&mut sum, t);
            accumulate(&mut sum, -t);
            t += 2.0 * h;
        }
        let next = sum.map(|s| s * h);
        let done = level >= 3
            && next.iter().zip(&estimate).all(|(a, b)| {
                let scale = a.abs().max(b.abs()).max(1e-300);
                (a - b).abs() <= rel_tol * scale
            });
        estimate = next;
        if done {
            break;
        }
    }
    estimate
}

// Gauss–Kronrod (7, 15) nodes and weights on [-1, 1].
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
    0.209_482_141_084_728_0,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let pair = f(center - dx) + f(center + dx);
        kronrod += WGK[j] * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    (kronrod * half, ((kronrod - gauss) * half).abs())
}

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub error: f64,
    pub converged: bool,
}

/// Globally adaptive Gauss–Kronrod integration over a finite interval.
pub fn adaptive<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, abs_tol: f64, rel_tol: f64) -> Integral {
    if a == b {
        return Integral {
            value: 0.0,
            error: 0.0,
            converged: true,
        };
    }
    const MAX_INTERVALS: usize = 4000;
    let (v, e) = gk15(&f, a, b);
    // (lower, upper, value, error)
    let mut intervals = vec![(a, b, v, e)];
    let mut total = v;
    let mut error = e;
    while error > abs_tol.max(rel_tol * total.abs()) && intervals.len() < MAX_INTERVALS {
        let worst = intervals
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .map(|(i, _)| i)
            .unwrap();
        let (lo, hi, v0, e0) = intervals.swap_remove(worst);
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            intervals.push((lo, hi, v0, 0.0));
            continue;
        }
        let (v1, e1) = gk15(&f, lo, mid);
        let (v2, e2) = gk15(&f, mid, hi);
        total += v1 + v2 - v0;
        error += e1 + e2 - e0;
        intervals.push((lo, mid, v1, e1));
        intervals.push((mid, hi, v2, e2));
    }
    // Re-sum to shed accumulated rounding from the running updates.
    let value: f64 = intervals.iter().map(|iv| iv.2).sum();
    let err: f64 = intervals.iter().map(|iv| iv.3).sum();
    Integral {
        value,
        error: err,
        converged: err <= abs_tol.max(rel_tol * value.abs()),
    }
}

/// Integrates over `[a, inf)` via the map `x = a + t / (1 - t)`.
pub fn adaptive_to_infinity<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    abs_tol: f64,
    rel_tol: f64,
) -> Integral {
    adaptive(
        |t: f64| {
            if t >= 1.0 {
                return 0.0;
            }
            let one_minus = 1.0 - t;
            let x = a + t / one_minus;
            let v = f(x) / (one_minus * one_minus);
            if v.is_finite() {
                v
            } else {
                0.0
            }
        },
        0.0,
        1.0,
        abs_tol,
        rel_tol,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tanh_sinh_handles_endpoint_singularities() {
        // ∫ u^{-1/2} du = 2, ∫ ln(u)^2 du = 2, ∫ (1-u)^{-0.9} du = 10
        let [a, b, c] = tanh_sinh_unit(|u, v| [u.powf(-0.5), u.ln().powi(2), v.powf(-0.9)], 1e-13);
        assert!((a - 2.0).abs() < 1e-11, "{a}");
        assert!((b - 2.0).abs() < 1e-11, "{b}");
        assert!((c - 10.0).abs() < 1e-8, "{c}");
    }

    #[test]
    fn gauss_kronrod_polynomial_and_gaussian() {
        let r = adaptive(|x| x.powi(5) - 3.0 * x, -1.0, 2.0, 1e-13, 1e-13);
        assert!((r.value - (64.0 / 6.0 - 1.0 / 6.0 - 4.5)).abs() < 1e-12);
        let g = adaptive(|x| (-0.5 * x * x).exp(), -40.0, 40.0, 1e-14, 1e-14);
        assert!((g.value - (2.0 * std::f64::consts::PI).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn semi_infinite_exponential() {
        let r = adaptive_to_infinity(|x| (-x).exp(), 0.0, 1e-13, 1e-13);
        assert!((r.value - 1.0).abs() < 1e-11, "{}", r.value);
    }
}
