//! Numerical building blocks shared by the estimators.

pub mod derivatives;
pub mod nelder_mead;
pub mod quadrature;
pub mod roots;
pub mod sobol;

/// Hyndman–Fan type-8 sample quantile of an ascending-sorted slice.
pub(crate) fn type8_sorted(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    let nf = n as f64;
    let h = ((nf + 1.0 / 3.0) * p + 1.0 / 3.0).clamp(1.0, nf);
    let j = h.floor();
    let idx = j as usize;
    if idx >= n {
        return sorted[n - 1];
    }
    let frac = h - j;
    let lo = sorted[idx - 1];
    if frac == 0.0 {
        lo
    } else {
        lo + frac * (sorted[idx] - lo)
    }
}

pub(crate) fn sorted_copy(data: &[f64]) -> Vec<f64> {
    let mut v = data.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

pub(crate) fn mean(data: &[f64]) -> f64 {
    data.iter().sum::<f64>() / data.len() as f64
}

/// Sample standard deviation with divisor `n - 1`.
pub(crate) fn sd(data: &[f64]) -> f64 {
    let m = mean(data);
    let ss: f64 = data.iter().map(|x| (x - m) * (x - m)).sum();
    (ss / (data.len() as f64 - 1.0)).sqrt()
}

/// Standard normal quantile, `-inf`/`inf` at 0 and 1.
pub fn normal_quantile(p: f64) -> f64 {
    if p <= 0.0 {
        f64::NEG_INFINITY
    } else if p >= 1.0 {
        f64::INFINITY
    } else {
        -std::f64::consts::SQRT_2 * statrs::function::erf::erfc_inv(2.0 * p)
    }
}

/// Standard normal CDF.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * statrs::function::erf::erfc(-x / std::f64::consts::SQRT_2)
}
