//! Oracles shared by the integration tests. Nothing here calls into the
//! library's own numerics.
#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Two-sided one-sample Kolmogorov–Smirnov statistic.
pub fn ks_statistic<F: Fn(f64) -> f64>(sample: &[f64], cdf: F) -> f64 {
    let mut x = sample.to_vec();
    x.sort_by(f64::total_cmp);
    let n = x.len() as f64;
    x.iter()
        .enumerate()
        .map(|(i, &v)| {
            let f = cdf(v);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

/// Survival function of the Kolmogorov distribution.
pub fn kolmogorov_sf(lambda: f64) -> f64 {
    if lambda <= 0.0 {
        return 1.0;
    }
    if lambda < 1.18 {
        // Theta-function form, fast for small arguments.
        let c = std::f64::consts::PI.powi(2) / (8.0 * lambda * lambda);
        let s: f64 = (1..=20)
            .map(|j| {
                let k = (2 * j - 1) as f64;
                (-k * k * c).exp()
            })
            .sum();
        return 1.0 - (2.0 * std::f64::consts::PI).sqrt() / lambda * s;
    }
    let s: f64 = (1..=100)
        .map(|j| {
            let j = j as f64;
            let sign = if j as i64 % 2 == 1 { 1.0 } else { -1.0 };
            sign * (-2.0 * j * j * lambda * lambda).exp()
        })
        .sum();
    (2.0 * s).clamp(0.0, 1.0)
}

/// KS statistic and its asymptotic p-value with Stephens' small-sample factor.
pub fn ks_test<F: Fn(f64) -> f64>(sample: &[f64], cdf: F) -> (f64, f64) {
    let d = ks_statistic(sample, cdf);
    let rn = (sample.len() as f64).sqrt();
    (d, kolmogorov_sf((rn + 0.12 + 0.11 / rn) * d))
}

/// Double-exponential quadrature of `f` over `(0, 1)`. `f` receives `u` and
/// `1 - u` computed without cancellation.
pub fn tanh_sinh01<F: Fn(f64, f64) -> f64>(f: F) -> f64 {
    let h = 1.0 / 64.0;
    let half_pi = std::f64::consts::FRAC_PI_2;
    let mut total = 0.0;
    for k in -(64 * 7)..=(64 * 7) {
        let t = k as f64 * h;
        let s = half_pi * t.sinh();
        // u = (1 + tanh s) / 2 and 1 - u = (1 - tanh s) / 2 = 1 / (1 + e^{2s}).
        let v = 1.0 / (1.0 + (2.0 * s).exp());
        let u = 1.0 / (1.0 + (-2.0 * s).exp());
        if u <= 0.0 || v <= 0.0 {
            continue;
        }
        let w = 0.5 * half_pi * t.cosh() / s.cosh().powi(2);
        let fx = f(u, v);
        if fx.is_finite() {
            total += w * fx;
        }
    }
    total * h
}

/// Composite 10-point Gauss–Legendre over the panels `edges[i]..edges[i+1]`.
pub fn gauss_legendre_panels<F: Fn(f64) -> f64>(f: F, edges: &[f64]) -> f64 {
    const X: [f64; 5] = [
        0.148_874_338_981_631_2,
        0.433_395_394_129_247_2,
        0.679_409_568_299_024_4,
        0.865_063_366_688_984_5,
        0.973_906_528_517_171_7,
    ];
    const W: [f64; 5] = [
        0.295_524_224_714_752_9,
        0.269_266_719_309_996_4,
        0.219_086_362_515_982_0,
        0.149_451_349_150_580_6,
        0.066_671_344_308_688_1,
    ];
    edges
        .windows(2)
        .map(|p| {
            let (c, r) = (0.5 * (p[0] + p[1]), 0.5 * (p[1] - p[0]));
            r * X
                .iter()
                .zip(W)
                .map(|(&x, w)| w * (f(c - r * x) + f(c + r * x)))
                .sum::<f64>()
        })
        .sum()
}

/// Lower bound on the 2-D star discrepancy: local discrepancy of anchored
/// boxes whose corners are drawn from the point coordinates, both open and
/// closed, plus random corners.
pub fn star_discrepancy_estimate(points: &[[f64; 2]], anchors: usize, seed: u64) -> f64 {
    let mut r = rng(seed);
    let n = points.len() as f64;
    let mut worst = 0.0f64;
    for k in 0..anchors {
        let (a, b) = if k % 2 == 0 {
            let p = points[r.random_range(0..points.len())];
            let q = points[r.random_range(0..points.len())];
            (p[0], q[1])
        } else {
            (r.random::<f64>(), r.random::<f64>())
        };
        let open = points.iter().filter(|p| p[0] < a && p[1] < b).count() as f64;
        let closed = points.iter().filter(|p| p[0] <= a && p[1] <= b).count() as f64;
        let vol = a * b;
        worst = worst.max((open / n - vol).abs()).max((closed / n - vol).abs());
    }
    worst
}

pub fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

pub fn sd(v: &[f64]) -> f64 {
    let m = mean(v);
    (v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (v.len() - 1) as f64).sqrt()
}

/// Twelve parameter vectors across both parametrizations, all with finite
/// fourth moments.
pub fn parameter_set() -> Vec<hgld::GldParams> {
    use hgld::GldParams;
    vec![
        GldParams::rs(0.0, 1.0, 1.0, 1.0),
        GldParams::rs(4.74, 0.12, 0.0032, 0.20),
        GldParams::rs(0.0, 0.1975, 0.1349, 0.1349),
        GldParams::rs(-1.43, 0.11, 0.0023, 0.19),
        GldParams::rs(3.87, 0.10, 0.024, 0.19),
        GldParams::rs(0.0, -1.0, -0.1, -0.15),
        GldParams::fkml(0.0, 1.0, 0.0, 0.0),
        GldParams::fkml(0.0, 2.0, 1.0, 1.0),
        GldParams::fkml(-0.408, 1.07, 0.84, 0.02),
        GldParams::fkml(1.0, 0.5, -0.1, 0.2),
        GldParams::fkml(0.0, 1.0, 0.5, -0.2),
        GldParams::fkml(2.0, 3.0, 1.5, 0.3),
    ]
}

/// Largest `|F(Q(u)) - u|` over `u = k / 10^4`, `k = 1..9999`.
pub fn round_trip_error(g: &hgld::Gld) -> f64 {
    (1..10_000)
        .map(|k| {
            let u = k as f64 * 1e-4;
            (g.cdf(g.quantile(u).unwrap()) - u).abs()
        })
        .fold(0.0, f64::max)
}

/// `int pdf` between the quantiles at `1e-9` and `1 - 1e-9`, in panels
/// whose edges are quantiles, plus the `2e-9` of mass left outside.
pub fn pdf_mass(g: &hgld::Gld) -> f64 {
    let mut us: Vec<f64> = (1..=9).map(|k| 10f64.powi(-(k as i32))).collect();
    us.extend((1..1000).map(|k| k as f64 / 1000.0));
    us.extend((1..=9).map(|k| 1.0 - 10f64.powi(-(k as i32))));
    us.sort_by(f64::total_cmp);
    let edges: Vec<f64> = us.iter().map(|&u| g.quantile(u).unwrap()).collect();
    gauss_legendre_panels(|x| g.pdf(x), &edges) + 2e-9
}

/// Independent evaluation of the quantile function.
pub fn quantile_oracle(p: &hgld::GldParams, u: f64, v: f64) -> f64 {
    let [l1, l2, l3, l4] = p.as_array();
    match p.parametrization {
        hgld::Parametrization::Rs => l1 + (u.powf(l3) - v.powf(l4)) / l2,
        hgld::Parametrization::Fkml => {
            let bc = |x: f64, l: f64| if l == 0.0 { x.ln() } else { (x.powf(l) - 1.0) / l };
            l1 + (bc(u, l3) - bc(v, l4)) / l2
        }
    }
}

/// `E[X^k]` as `int_0^1 Q(u)^k du`.
pub fn raw_moment_oracle(p: &hgld::GldParams, k: i32) -> f64 {
    tanh_sinh01(|u, v| quantile_oracle(p, u, v).powi(k))
}
