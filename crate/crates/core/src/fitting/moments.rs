use serde::Serialize;

use super::{CandidateTable, OptimizerConfig};
use crate::error::{Error, Result};
use crate::gld::{fkml_central_moments, GldParams, Parametrization};
use crate::numerics::nelder_mead::minimize_with_restarts;

/// Shapes are kept strictly above `-1/4` so the fourth moment exists.
pub(crate) const FKML_SHAPE_FLOOR: f64 = -0.25 + 1e-6;
const MOM_STARTS: usize = 4;
const SOLVED_H: f64 = 1e-7;

/// Sample mean, variance, skewness and kurtosis, all with divisor `n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MomentStats {
    pub mean: f64,
    pub variance: f64,
    pub skewness: f64,
    pub kurtosis: f64,
}

pub fn sample_moments(data: &[f64]) -> Result<MomentStats> {
    if data.len() < 2 {
        return Err(Error::InsufficientData("need at least 2 observations".into()));
    }
    let n = data.len() as f64;
    let mean = data.iter().sum::<f64>() / n;
    let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
    for &x in data {
        let d = x - mean;
        let d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    let (m2, m3, m4) = (m2 / n, m3 / n, m4 / n);
    if !(m2 > 0.0) {
        return Err(Error::DegenerateSample("sample variance is zero".into()));
    }
    Ok(MomentStats {
        mean,
        variance: m2,
        skewness: m3 / m2.powf(1.5),
        kurtosis: m4 / (m2 * m2),
    })
}

/// `(alpha3, alpha4)` of FKML shapes `(l3, l4)`; `None` unless
/// `min(l3, l4) > -1/4`.
pub fn fkml_theoretical_shape(lambda3: f64, lambda4: f64) -> Option<[f64; 2]> {
    let [c2, c3, c4] = fkml_central_moments(lambda3, lambda4)?;
    if !(c2 > 0.0) {
        return None;
    }
    Some([c3 / c2.powf(1.5), c4 / (c2 * c2)])
}

/// Completes FKML shapes into a full vector matching the sample mean and
/// variance.
pub(crate) fn fkml_complete(stats: &MomentStats, lambda3: f64, lambda4: f64) -> Option<GldParams> {
    let [c2, _, _] = fkml_central_moments(lambda3, lambda4)?;
    fkml_complete_with_c2(stats, lambda3, lambda4, c2)
}

pub(crate) fn fkml_complete_with_c2(
    stats: &MomentStats,
    lambda3: f64,
    lambda4: f64,
    c2: f64,
) -> Option<GldParams> {
    let lambda2 = (c2 / stats.variance).sqrt();
    if !(lambda2 > 0.0 && lambda2.is_finite()) {
        return None;
    }
    let lambda1 = stats.mean + (1.0 / (lambda3 + 1.0) - 1.0 / (lambda4 + 1.0)) / lambda2;
    Some(GldParams::fkml(lambda1, lambda2, lambda3, lambda4))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MomFit {
    pub params: GldParams,
    /// Distance between fitted and sample `(alpha3, alpha4)`.
    pub objective: f64,
    pub converged: bool,
    /// The optimum sits on the `-1/4` boundary.
    pub clamped: bool,
}

fn clamp_shape(x: f64) -> f64 {
    x.max(FKML_SHAPE_FLOOR)
}

fn shape_distance(l3: f64, l4: f64, target: [f64; 2]) -> f64 {
    match fkml_theoretical_shape(l3, l4) {
        Some([a3, a4]) => {
            let h = (a3 - target[0]).hypot(a4 - target[1]);
            if h.is_finite() {
                h
            } else {
                f64::INFINITY
            }
        }
        None => f64::INFINITY,
    }
}

/// FKML fit by matching the first four moments. Simplex searches start from
/// the best quasi-random candidates; shapes are clamped to `(-1/4, inf)`.
pub fn fkml_mom_fit(data: &[f64], config: &OptimizerConfig) -> Result<MomFit> {
    config.validate()?;
    let table = CandidateTable::shared(Parametrization::Fkml, config);
    fkml_mom_fit_with(data, &table, config)
}

pub(crate) fn fkml_mom_fit_with(
    data: &[f64],
    table: &CandidateTable,
    config: &OptimizerConfig,
) -> Result<MomFit> {
    if data.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidArgument("non-finite observation".into()));
    }
    let stats = sample_moments(data)?;
    let target = [stats.skewness, stats.kurtosis];
    let starts: Vec<[f64; 2]> = table
        .ranked(target)
        .into_iter()
        .take(MOM_STARTS)
        .map(|i| table.shape(i))
        .collect();
    if starts.is_empty() {
        return Err(Error::NoAdmissibleCandidate(table.len()));
    }
    fkml_mom_from_starts(&stats, &starts, config)
}

pub(crate) fn fkml_mom_from_starts(
    stats: &MomentStats,
    starts: &[[f64; 2]],
    config: &OptimizerConfig,
) -> Result<MomFit> {
    let target = [stats.skewness, stats.kurtosis];
    let opts = config.simplex();
    let mut best: Option<([f64; 2], f64, bool)> = None;
    for s in starts {
        let objective = |x: &[f64]| shape_distance(clamp_shape(x[0]), clamp_shape(x[1]), target);
        let steps = [0.1 * s[0].abs().max(0.05), 0.1 * s[1].abs().max(0.05)];
        let m = minimize_with_restarts(objective, s, &steps, &opts, config.restarts);
        let x = [clamp_shape(m.x[0]), clamp_shape(m.x[1])];
        if best.as_ref().is_none_or(|b| m.value < b.1) {
            best = Some((x, m.value, m.converged));
        }
    }
    let (x, h, simplex_converged) = best.ok_or(Error::NoAdmissibleCandidate(0))?;
    if !h.is_finite() {
        return Err(Error::NoAdmissibleCandidate(starts.len()));
    }
    let params = fkml_complete(stats, x[0], x[1])
        .ok_or_else(|| Error::NonConvergence("moment fit produced no scale".into()))?;
    Ok(MomFit {
        params,
        objective: h,
        converged: simplex_converged && h <= SOLVED_H,
        clamped: x[0] <= FKML_SHAPE_FLOOR || x[1] <= FKML_SHAPE_FLOOR,
    })
}
