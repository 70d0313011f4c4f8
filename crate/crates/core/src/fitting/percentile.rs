use serde::Serialize;

use super::{CandidateTable, OptimizerConfig};
use crate::error::{Error, Result};
use crate::gld::{GldParams, Parametrization};
use crate::numerics::sorted_copy;

pub const DEFAULT_PERCENTILE_V: f64 = 0.1;

/// Number of best candidates used as Newton starting points.
const NEWTON_STARTS: usize = 8;
const NEWTON_MAX_ITER: usize = 100;
const SOLVED_H: f64 = 1e-9;

/// Sample percentile `x_(r) + ((n+1)p - r)(x_(r+1) - x_(r))` with
/// `r = floor((n+1)p)`. Requires `1/(n+1) <= p <= n/(n+1)`.
pub fn sample_percentile(data: &[f64], p: f64) -> Result<f64> {
    if data.is_empty() {
        return Err(Error::InsufficientData("empty sample".into()));
    }
    let pos = (data.len() as f64 + 1.0) * p;
    if !(pos >= 1.0 && pos <= data.len() as f64) {
        return Err(Error::ProbabilityOutOfRange(p));
    }
    Ok(percentile_sorted(&sorted_copy(data), p))
}

/// Positions outside `[1, n]` clamp to the sample extremes.
pub(crate) fn percentile_sorted(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    let pos = (n as f64 + 1.0) * p;
    let r = pos.floor();
    if r < 1.0 {
        return sorted[0];
    }
    let ri = r as usize;
    if ri >= n {
        return sorted[n - 1];
    }
    let lo = sorted[ri - 1];
    lo + (pos - r) * (sorted[ri] - lo)
}

/// Location, spread, left/right balance and tail weight from sample
/// percentiles. For very small samples the outer percentiles clamp to the
/// sample extremes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PercentileStats {
    pub rho1: f64,
    pub rho2: f64,
    pub rho3: f64,
    pub rho4: f64,
}

pub fn percentile_stats(data: &[f64], v: f64) -> Result<PercentileStats> {
    if data.is_empty() {
        return Err(Error::InsufficientData("empty sample".into()));
    }
    if !(v > 0.0 && v < 0.25) {
        return Err(Error::InvalidArgument(format!("v = {v} outside (0, 0.25)")));
    }
    let stats = percentile_stats_sorted(&sorted_copy(data), v);
    if !(stats.rho2 > 0.0) {
        return Err(Error::DegenerateSample("percentile spread is zero".into()));
    }
    Ok(stats)
}

pub(crate) fn percentile_stats_sorted(sorted: &[f64], v: f64) -> PercentileStats {
    let p = |q| percentile_sorted(sorted, q);
    let (lo, med, hi) = (p(v), p(0.5), p(1.0 - v));
    PercentileStats {
        rho1: med,
        rho2: hi - lo,
        rho3: (med - lo) / (hi - med),
        rho4: (p(0.75) - p(0.25)) / (hi - lo),
    }
}

/// Unit-scale RS quantile `u^l3 - (1-u)^l4`.
fn rs_unit(u: f64, l3: f64, l4: f64) -> f64 {
    u.powf(l3) - (1.0 - u).powf(l4)
}

/// `(rho3, rho4)` of the RS distribution with shapes `(l3, l4)`; these do
/// not depend on `l1` or `l2`.
pub fn rs_theoretical_shape(lambda3: f64, lambda4: f64, v: f64) -> [f64; 2] {
    let q = |u| rs_unit(u, lambda3, lambda4);
    let (lo, med, hi) = (q(v), q(0.5), q(1.0 - v));
    [(med - lo) / (hi - med), (q(0.75) - q(0.25)) / (hi - lo)]
}

/// `lambda2 * rho2` for RS shapes `(l3, l4)`.
pub(crate) fn rs_scale_numerator(lambda3: f64, lambda4: f64, v: f64) -> f64 {
    rs_unit(1.0 - v, lambda3, lambda4) - rs_unit(v, lambda3, lambda4)
}

/// Completes RS shapes into a full vector matching `rho1` and `rho2`.
pub(crate) fn rs_complete(stats: &PercentileStats, lambda3: f64, lambda4: f64, v: f64) -> GldParams {
    let lambda2 = rs_scale_numerator(lambda3, lambda4, v) / stats.rho2;
    let lambda1 = stats.rho1 - rs_unit(0.5, lambda3, lambda4) / lambda2;
    GldParams::rs(lambda1, lambda2, lambda3, lambda4)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PercentileFit {
    pub params: GldParams,
    /// Distance between the fitted and sample `(rho3, rho4)`.
    pub objective: f64,
    pub converged: bool,
}

fn shape_distance(l3: f64, l4: f64, target: [f64; 2], v: f64) -> f64 {
    let [r3, r4] = rs_theoretical_shape(l3, l4, v);
    let h = (r3 - target[0]).hypot(r4 - target[1]);
    if h.is_finite() {
        h
    } else {
        f64::INFINITY
    }
}

/// Damped Gauss-Newton on `(l3, l4)` for `rho(l) = target`.
fn newton_solve(start: [f64; 2], target: [f64; 2], v: f64) -> ([f64; 2], f64) {
    let residual = |l: [f64; 2]| {
        let [r3, r4] = rs_theoretical_shape(l[0], l[1], v);
        [r3 - target[0], r4 - target[1]]
    };
    let mut x = start;
    let mut r = residual(x);
    let mut h = r[0].hypot(r[1]);
    if !h.is_finite() {
        return (x, f64::INFINITY);
    }
    let mut damping = 0.0;
    for _ in 0..NEWTON_MAX_ITER {
        if h <= 1e-14 {
            break;
        }
        let mut jac = [[0.0; 2]; 2];
        for j in 0..2 {
            let step = 1e-6 * x[j].abs().max(1e-3);
            let mut xp = x;
            let mut xm = x;
            xp[j] += step;
            xm[j] -= step;
            let (rp, rm) = (residual(xp), residual(xm));
            for i in 0..2 {
                jac[i][j] = (rp[i] - rm[i]) / (2.0 * step);
            }
        }
        // Levenberg-style solve of (J^T J + mu I) d = -J^T r.
        let jtj = [
            [
                jac[0][0] * jac[0][0] + jac[1][0] * jac[1][0],
                jac[0][0] * jac[0][1] + jac[1][0] * jac[1][1],
            ],
            [0.0, jac[0][1] * jac[0][1] + jac[1][1] * jac[1][1]],
        ];
        let g = [
            jac[0][0] * r[0] + jac[1][0] * r[1],
            jac[0][1] * r[0] + jac[1][1] * r[1],
        ];
        let mut improved = false;
        for _ in 0..40 {
            let a = jtj[0][0] + damping;
            let b = jtj[0][1];
            let d = jtj[1][1] + damping;
            let det = a * d - b * b;
            if det.is_finite() && det > 0.0 {
                let dx = [-(d * g[0] - b * g[1]) / det, -(a * g[1] - b * g[0]) / det];
                let cand = [x[0] + dx[0], x[1] + dx[1]];
                let rc = residual(cand);
                let hc = rc[0].hypot(rc[1]);
                if hc.is_finite() && hc < h {
                    x = cand;
                    r = rc;
                    h = hc;
                    damping *= 0.3;
                    improved = true;
                    break;
                }
            }
            let scale = jtj[0][0].max(jtj[1][1]).max(1e-12);
            damping = if damping == 0.0 { 1e-6 * scale } else { damping * 10.0 };
        }
        if !improved {
            break;
        }
    }
    (x, h)
}

/// RS fit by matching `rho1..rho4`. Newton starts from the best quasi-random
/// candidates; among the solutions the valid one with the smallest
/// objective wins.
pub fn rs_percentile_fit(data: &[f64], config: &OptimizerConfig) -> Result<PercentileFit> {
    config.validate()?;
    let table = CandidateTable::shared(Parametrization::Rs, config);
    rs_percentile_fit_with(data, &table, config.percentile_v)
}

pub(crate) fn rs_percentile_fit_with(
    data: &[f64],
    table: &CandidateTable,
    v: f64,
) -> Result<PercentileFit> {
    if data.len() < 4 || data.iter().any(|x| !x.is_finite()) {
        return Err(Error::InsufficientData(
            "need at least 4 finite observations".into(),
        ));
    }
    let sorted = sorted_copy(data);
    let stats = percentile_stats_sorted(&sorted, v);
    if !(stats.rho2 > 0.0) || !stats.rho3.is_finite() {
        return Err(Error::DegenerateSample("percentile spread is zero".into()));
    }
    let target = [stats.rho3, stats.rho4];
    let ranked = table.ranked(target);
    let mut best: Option<(bool, f64, GldParams)> = None;
    for &idx in ranked.iter().take(NEWTON_STARTS) {
        let c = table.shape(idx);
        let (l, _) = newton_solve(c, target, v);
        let h = shape_distance(l[0], l[1], target, v);
        let params = rs_complete(&stats, l[0], l[1], v);
        let valid = params.is_valid();
        let better = match &best {
            None => true,
            Some((bv, bh, _)) => (valid && !bv) || (valid == *bv && h < *bh),
        };
        if better {
            best = Some((valid, h, params));
        }
    }
    let (valid, h, params) = best.ok_or(Error::NoAdmissibleCandidate(table.len()))?;
    Ok(PercentileFit {
        params,
        objective: h,
        converged: valid && h <= SOLVED_H,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gld::Gld;

    #[test]
    fn percentile_of_one_to_ten() {
        let d: Vec<f64> = (1..=10).map(f64::from).collect();
        assert_eq!(sample_percentile(&d, 0.5).unwrap(), 5.5);
        let s = percentile_stats(&d, 0.1).unwrap();
        assert_eq!(s.rho1, 5.5);
        assert_eq!(s.rho2, 8.8);
        assert_eq!(s.rho3, 1.0);
        assert_eq!(s.rho4, 0.625);
    }

    #[test]
    fn percentile_errors() {
        assert!(matches!(sample_percentile(&[], 0.5), Err(Error::InsufficientData(_))));
        assert!(matches!(
            sample_percentile(&[1.0], 1.0),
            Err(Error::ProbabilityOutOfRange(_))
        ));
        assert!(sample_percentile(&[1.0, 2.0], 0.3).is_err());
        assert_eq!(sample_percentile(&[1.0, 2.0], 2.0 / 3.0).unwrap(), 2.0);
        let d: Vec<f64> = (1..=10).map(f64::from).collect();
        assert!((sample_percentile(&d, 0.1).unwrap() - 1.1).abs() < 1e-15);
        assert_eq!(sample_percentile(&[4.0; 7], 0.4).unwrap(), 4.0);
    }

    #[test]
    fn theoretical_shape_of_uniform() {
        let [r3, r4] = rs_theoretical_shape(1.0, 1.0, 0.1);
        assert!((r3 - 1.0).abs() < 1e-15);
        assert!((r4 - 0.625).abs() < 1e-15);
    }

    #[test]
    fn recovers_parameters_from_exact_percentiles() {
        // A large sample on a fine quantile grid has near-exact percentiles.
        let truth = Gld::new(GldParams::rs(0.0, 0.2, 0.15, 0.25)).unwrap();
        let n = 99_999;
        let data: Vec<f64> = (1..=n)
            .map(|i| truth.quantile(i as f64 / (n + 1) as f64).unwrap())
            .collect();
        let fit = rs_percentile_fit(&data, &OptimizerConfig::default()).unwrap();
        assert!(fit.converged, "{fit:?}");
        assert!(fit.objective < 1e-6);
        let p = fit.params;
        assert!((p.lambda3 - 0.15).abs() < 1e-3, "{p:?}");
        assert!((p.lambda4 - 0.25).abs() < 1e-3, "{p:?}");
        assert!((p.lambda2 - 0.2).abs() < 1e-3, "{p:?}");
    }
}
