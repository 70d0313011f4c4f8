//! Goodness-of-fit tools: Gaussian kernel density estimate with the
//! Sheather–Jones bandwidth, distances between densities, QQ pairs and
//! histogram tables.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::quadrature::{adaptive, adaptive_to_infinity};
use crate::numerics::roots::{brent, golden_max};
use crate::numerics::{sd, sorted_copy};

const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;
/// Kernel terms beyond this many bandwidths underflow to zero.
const KERNEL_REACH: f64 = 39.0;
/// Samples above this size use binned pair distances for the bandwidth.
const EXACT_PAIRS_MAX: usize = 5000;
const BINS: usize = 1000;
pub const MIN_BANDWIDTH_SIZE: usize = 10;
pub const GRID_POINTS: usize = 4096;
/// Grid margin beyond the data, in bandwidths.
pub const GRID_MARGIN: f64 = 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Bandwidth {
    pub value: f64,
    /// Set when the plug-in equation had no usable root and the
    /// normal-reference rule was used.
    pub fallback: bool,
}

/// Type-7 quantile of a sorted sample.
fn type7(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Pairwise distances, exact or as bin-distance counts.
enum Pairs {
    Exact(Vec<f64>),
    Binned { width: f64, counts: Vec<f64> },
}

impl Pairs {
    fn new(sorted: &[f64]) -> Self {
        let n = sorted.len();
        if n <= EXACT_PAIRS_MAX {
            let mut d = Vec::with_capacity(n * (n - 1) / 2);
            for i in 0..n {
                for j in 0..i {
                    d.push(sorted[i] - sorted[j]);
                }
            }
            return Pairs::Exact(d);
        }
        let (lo, hi) = (sorted[0], sorted[n - 1]);
        let width = 1.01 * (hi - lo) / BINS as f64;
        let mut bins = vec![0.0f64; BINS];
        for &x in sorted {
            let k = (((x - lo) / width) as usize).min(BINS - 1);
            bins[k] += 1.0;
        }
        let mut counts = vec![0.0; BINS];
        for i in 0..BINS {
            if bins[i] == 0.0 {
                continue;
            }
            counts[0] += bins[i] * (bins[i] - 1.0) / 2.0;
            for j in 0..i {
                counts[i - j] += bins[i] * bins[j];
            }
        }
        Pairs::Binned { width, counts }
    }

    /// Sum of `g(d / h)` over unordered pairs.
    fn sum(&self, h: f64, g: impl Fn(f64) -> f64) -> f64 {
        match self {
            Pairs::Exact(d) => d.iter().map(|&x| g(x / h)).sum(),
            Pairs::Binned { width, counts } => counts
                .iter()
                .enumerate()
                .filter(|(_, &c)| c > 0.0)
                .map(|(k, &c)| c * g(k as f64 * width / h))
                .sum(),
        }
    }
}

/// Fourth derivative functional estimate, diagonal terms included.
fn phi4(pairs: &Pairs, n: usize, h: f64) -> f64 {
    let s = pairs.sum(h, |z| {
        let d = z * z;
        (-0.5 * d).exp() * (d * d - 6.0 * d + 3.0)
    });
    let nf = n as f64;
    (2.0 * s + 3.0 * nf) * INV_SQRT_2PI / (nf * (nf - 1.0) * h.powi(5))
}

/// Sixth derivative functional estimate, diagonal terms included.
fn phi6(pairs: &Pairs, n: usize, h: f64) -> f64 {
    let s = pairs.sum(h, |z| {
        let d = z * z;
        (-0.5 * d).exp() * (d * d * d - 15.0 * d * d + 45.0 * d - 15.0)
    });
    let nf = n as f64;
    (2.0 * s - 15.0 * nf) * INV_SQRT_2PI / (nf * (nf - 1.0) * h.powi(7))
}

/// `0.9 min(sd, IQR / 1.34) n^(-1/5)`.
pub fn normal_reference_bandwidth(data: &[f64]) -> Result<f64> {
    if data.len() < 2 {
        return Err(Error::InsufficientData("bandwidth needs two observations".into()));
    }
    let sorted = sorted_copy(data);
    let s = sd(data);
    let iqr = (type7(&sorted, 0.75) - type7(&sorted, 0.25)) / 1.34;
    let mut scale = s.min(iqr);
    if !(scale > 0.0) {
        scale = if s > 0.0 { s } else { sorted[0].abs().max(1.0) };
    }
    Ok(0.9 * scale * (data.len() as f64).powf(-0.2))
}

/// Solve-the-equation Sheather–Jones plug-in bandwidth for a Gaussian kernel.
///
/// Pilot bandwidths follow the usual `1.24 s n^(-1/7)` and `1.23 s n^(-1/9)`
/// rules with `s = min(sd, IQR / 1.349)`. The root of
/// `h = (R(K) / (n phi4(alpha2(h))))^(1/5)` is bracketed starting from
/// `[0.1, 1] * 1.144 s n^(-1/5)` and widened as needed.
pub fn sheather_jones_bandwidth(data: &[f64]) -> Result<Bandwidth> {
    let n = data.len();
    if n < MIN_BANDWIDTH_SIZE {
        return Err(Error::InsufficientData(format!(
            "{n} observations, need {MIN_BANDWIDTH_SIZE}"
        )));
    }
    if data.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidArgument("non-finite observation".into()));
    }
    let sorted = sorted_copy(data);
    if sorted[0] == sorted[n - 1] {
        return Err(Error::DegenerateSample("all observations are equal".into()));
    }
    let fallback = || {
        normal_reference_bandwidth(data).map(|value| Bandwidth {
            value,
            fallback: true,
        })
    };
    let s = sd(data);
    let iqr = (type7(&sorted, 0.75) - type7(&sorted, 0.25)) / 1.349;
    let scale = if iqr > 0.0 { s.min(iqr) } else { s };
    let nf = n as f64;
    let pairs = Pairs::new(&sorted);

    let a = 1.24 * scale * nf.powf(-1.0 / 7.0);
    let b = 1.23 * scale * nf.powf(-1.0 / 9.0);
    let td = -phi6(&pairs, n, b);
    let sd_a = phi4(&pairs, n, a);
    if !(td > 0.0) || !td.is_finite() || !(sd_a > 0.0) {
        return fallback();
    }
    let alpha2 = 1.357 * (sd_a / td).powf(1.0 / 7.0);
    let c1 = 1.0 / (2.0 * std::f64::consts::PI.sqrt() * nf);
    let equation = |h: f64| (c1 / phi4(&pairs, n, alpha2 * h.powf(5.0 / 7.0))).powf(0.2) - h;

    let hmax = 1.144 * scale * nf.powf(-0.2);
    let (mut lower, mut upper) = (0.1 * hmax, hmax);
    let mut tries = 0;
    while !(equation(lower) * equation(upper) <= 0.0) {
        if tries > 99 {
            return fallback();
        }
        if tries % 2 == 0 {
            upper *= 1.2;
        } else {
            lower /= 1.2;
        }
        tries += 1;
    }
    match brent(equation, lower, upper, 1e-13 * hmax, 200) {
        Some(h) if h > 0.0 && h.is_finite() => Ok(Bandwidth {
            value: h,
            fallback: false,
        }),
        _ => fallback(),
    }
}

/// Gaussian kernel density estimate.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KdeEstimate {
    /// Ascending.
    data: Vec<f64>,
    bandwidth: f64,
}

impl KdeEstimate {
    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn bandwidth(&self) -> f64 {
        self.bandwidth
    }

    /// `(1 / (n h)) sum phi((y - y_i) / h)`.
    pub fn evaluate(&self, y: f64) -> f64 {
        let h = self.bandwidth;
        let lo = self.data.partition_point(|&x| x < y - KERNEL_REACH * h);
        let hi = self.data.partition_point(|&x| x <= y + KERNEL_REACH * h);
        let s: f64 = self.data[lo..hi]
            .iter()
            .map(|&x| {
                let z = (y - x) / h;
                (-0.5 * z * z).exp()
            })
            .sum();
        s * INV_SQRT_2PI / (self.data.len() as f64 * h)
    }

    /// `(x, f(x))` on `points` equally spaced values over `[lower, upper]`.
    pub fn curve(&self, lower: f64, upper: f64, points: usize) -> Vec<(f64, f64)> {
        linspace(lower, upper, points)
            .into_iter()
            .map(|x| (x, self.evaluate(x)))
            .collect()
    }

    /// Default display range: the data widened by three bandwidths.
    pub fn range(&self) -> (f64, f64) {
        let m = GRID_MARGIN * self.bandwidth;
        (self.data[0] - m, self.data[self.data.len() - 1] + m)
    }
}

pub fn kde(data: &[f64], bandwidth: f64) -> Result<KdeEstimate> {
    if !(bandwidth > 0.0) || !bandwidth.is_finite() {
        return Err(Error::InvalidArgument(format!("bandwidth {bandwidth}")));
    }
    if data.is_empty() || data.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidArgument("kde needs finite data".into()));
    }
    Ok(KdeEstimate {
        data: sorted_copy(data),
        bandwidth,
    })
}

fn linspace(lower: f64, upper: f64, points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![lower],
        _ => {
            let step = (upper - lower) / (points - 1) as f64;
            (0..points)
                .map(|i| if i == points - 1 { upper } else { lower + i as f64 * step })
                .collect()
        }
    }
}

/// Where the sup-norm is searched and where the squared gap is integrated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DistanceGrid {
    pub lower: f64,
    pub upper: f64,
    pub points: usize,
    /// Lower limit of the L2 integral; the upper limit is `+inf`.
    pub l2_lower: f64,
}

impl DistanceGrid {
    /// Data range widened by three bandwidths on `GRID_POINTS` points. The
    /// L2 integral starts at 0, or at the grid start when that is negative.
    pub fn for_data(data: &[f64], bandwidth: f64) -> Self {
        let lo = data.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = data.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let lower = lo - GRID_MARGIN * bandwidth;
        Self {
            lower,
            upper: hi + GRID_MARGIN * bandwidth,
            points: GRID_POINTS,
            l2_lower: lower.min(0.0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DistanceReport {
    /// Mean squared gap over the data points.
    pub global: f64,
    /// Square root of the integrated squared gap.
    pub l2: f64,
    /// Largest absolute gap found.
    pub linf: f64,
}

/// Distances between a fitted density and a kernel estimate on the KDE's
/// default grid.
pub fn density_distances<F: Fn(f64) -> f64>(
    fitted: F,
    estimate: &KdeEstimate,
    data: &[f64],
) -> Result<DistanceReport> {
    let grid = DistanceGrid::for_data(data, estimate.bandwidth());
    density_distances_with(fitted, |y| estimate.evaluate(y), data, &grid)
}

/// Distances between two densities. Symmetric in `f` and `g`.
///
/// The sup-norm takes the largest gap over the data points and the grid,
/// then refines around the grid argmax by golden-section search.
pub fn density_distances_with<F, G>(f: F, g: G, data: &[f64], grid: &DistanceGrid) -> Result<DistanceReport>
where
    F: Fn(f64) -> f64,
    G: Fn(f64) -> f64,
{
    if data.is_empty() {
        return Err(Error::InvalidArgument("distances need data".into()));
    }
    if !(grid.lower <= grid.upper) || grid.points == 0 || !grid.l2_lower.is_finite() {
        return Err(Error::InvalidArgument("invalid distance grid".into()));
    }
    let gap = |y: f64| -> Result<f64> {
        let (a, b) = (f(y), g(y));
        if !a.is_finite() || !b.is_finite() {
            return Err(Error::InvalidArgument(format!("density not finite at {y}")));
        }
        Ok((a - b).abs())
    };

    let mut sq = 0.0;
    let mut linf = 0.0f64;
    for &y in data {
        let d = gap(y)?;
        sq += d * d;
        linf = linf.max(d);
    }
    let global = sq / data.len() as f64;

    let xs = linspace(grid.lower, grid.upper, grid.points);
    let mut best = (0, -1.0);
    for (i, &x) in xs.iter().enumerate() {
        let d = gap(x)?;
        if d > best.1 {
            best = (i, d);
        }
    }
    linf = linf.max(best.1);
    if xs.len() > 2 {
        let a = xs[best.0.saturating_sub(1)];
        let b = xs[(best.0 + 1).min(xs.len() - 1)];
        let (_, refined) = golden_max(|y| gap(y).unwrap_or(0.0), a, b, 1e-10 * (b - a).max(1e-300));
        linf = linf.max(refined);
    }

    let squared = |y: f64| {
        let d = f(y) - g(y);
        if d.is_finite() {
            d * d
        } else {
            0.0
        }
    };
    let split = grid.upper.max(grid.l2_lower);
    let inner = adaptive(squared, grid.l2_lower, split, 1e-14, 1e-10);
    let tail = adaptive_to_infinity(squared, split, 1e-14, 1e-10);
    let l2 = (inner.value + tail.value).max(0.0).sqrt();
    Ok(DistanceReport { global, l2, linf })
}

/// `(x_(i), Q((i - 0.5) / n))` over the ascending sample.
pub fn qq_points<Q: Fn(f64) -> f64>(sample: &[f64], quantile: Q) -> Result<Vec<(f64, f64)>> {
    if sample.is_empty() {
        return Err(Error::InvalidArgument("empty sample".into()));
    }
    let n = sample.len() as f64;
    Ok(sorted_copy(sample)
        .into_iter()
        .enumerate()
        .map(|(i, x)| (x, quantile((i as f64 + 0.5) / n)))
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HistogramBin {
    pub lower: f64,
    pub upper: f64,
    pub count: usize,
    /// Count scaled so the bars integrate to 1.
    pub density: f64,
}

/// Equal-width histogram with Sturges' bin count when `bins` is `None`.
pub fn histogram(data: &[f64], bins: Option<usize>) -> Result<Vec<HistogramBin>> {
    if data.is_empty() || data.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidArgument("histogram needs finite data".into()));
    }
    let k = bins.unwrap_or_else(|| (data.len() as f64).log2().ceil() as usize + 1).max(1);
    let lo = data.iter().copied().fold(f64::INFINITY, f64::min);
    let mut hi = data.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if hi == lo {
        hi = lo + 1.0;
    }
    let width = (hi - lo) / k as f64;
    let mut counts = vec![0usize; k];
    for &x in data {
        counts[(((x - lo) / width) as usize).min(k - 1)] += 1;
    }
    let n = data.len() as f64;
    Ok(counts
        .into_iter()
        .enumerate()
        .map(|(i, count)| HistogramBin {
            lower: lo + i as f64 * width,
            upper: if i == k - 1 { hi } else { lo + (i + 1) as f64 * width },
            count,
            density: count as f64 / (n * width),
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kde_examples() {
        let one = kde(&[0.0], 1.0).unwrap();
        assert!((one.evaluate(0.0) - INV_SQRT_2PI).abs() < 1e-15);
        assert_eq!(one.evaluate(1e6), 0.0);
        let two = kde(&[-5.0, 5.0], 1.0).unwrap();
        assert!((two.evaluate(5.0) - 0.199_471_140_2).abs() < 1e-9);
        assert!(kde(&[1.0], 0.0).is_err());
    }

    #[test]
    fn constant_height_distances() {
        let f = |y: f64| if (0.0..=1.0).contains(&y) { 1.0 } else { 0.0 };
        let g = |y: f64| if (0.0..=1.0).contains(&y) { 0.5 } else { 0.0 };
        let data = [0.1, 0.4, 0.9];
        let grid = DistanceGrid {
            lower: -0.5,
            upper: 1.5,
            points: GRID_POINTS,
            l2_lower: 0.0,
        };
        let r = density_distances_with(f, g, &data, &grid).unwrap();
        assert!((r.global - 0.25).abs() < 1e-15);
        assert!((r.l2 - 0.5).abs() < 1e-8, "{}", r.l2);
        assert_eq!(r.linf, 0.5);
        let same = density_distances_with(f, f, &data, &grid).unwrap();
        assert_eq!((same.global, same.l2, same.linf), (0.0, 0.0, 0.0));
    }

    #[test]
    fn qq_examples() {
        assert_eq!(qq_points(&[3.0], |u| u).unwrap(), vec![(3.0, 0.5)]);
        let q = |u: f64| 2.0 * u - 1.0;
        let sample: Vec<f64> = (0..10).rev().map(|i| q((i as f64 + 0.5) / 10.0)).collect();
        assert!(qq_points(&sample, q).unwrap().iter().all(|(a, b)| (a - b).abs() < 1e-15));
        assert!(qq_points(&[], q).is_err());
    }

    #[test]
    fn bandwidth_rejects_small_or_constant_samples() {
        assert!(sheather_jones_bandwidth(&[1.0; 9]).is_err());
        assert!(matches!(
            sheather_jones_bandwidth(&[2.0; 20]),
            Err(Error::DegenerateSample(_))
        ));
    }

    #[test]
    fn histogram_counts_everything() {
        let data: Vec<f64> = (0..100).map(|i| i as f64).collect();
        let h = histogram(&data, None).unwrap();
        assert_eq!(h.len(), 8);
        assert_eq!(h.iter().map(|b| b.count).sum::<usize>(), 100);
        let area: f64 = h.iter().map(|b| b.density * (b.upper - b.lower)).sum();
        assert!((area - 1.0).abs() < 1e-12);
    }
}
