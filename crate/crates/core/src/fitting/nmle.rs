use super::moments::{fkml_complete_with_c2, sample_moments};
use super::percentile::{percentile_stats_sorted, rs_complete};
use super::{CandidateTable, FitResult, Initializer, OptimizerConfig};
use crate::error::{Error, Result};
use crate::gld::{Gld, GldParams, Parametrization};
use crate::numerics::nelder_mead::minimize_with_restarts;
use crate::numerics::{sd, sorted_copy};

/// Smallest sample the initializers can work with.
pub const MIN_FIT_SIZE: usize = 8;

/// `sum log f(x_i)`; `-inf` when an observation lies outside the support.
pub fn gld_log_likelihood(params: &GldParams, data: &[f64]) -> Result<f64> {
    Ok(Gld::new(*params)?.log_likelihood(data))
}

fn check_sample(data: &[f64]) -> Result<()> {
    if data.len() < MIN_FIT_SIZE {
        return Err(Error::InsufficientData(format!(
            "need at least {MIN_FIT_SIZE} observations, got {}",
            data.len()
        )));
    }
    if data.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidArgument("non-finite observation".into()));
    }
    Ok(())
}

/// Maximum-likelihood fit started from the best admissible quasi-random
/// candidate.
pub fn nmle_fit(
    data: &[f64],
    parametrization: Parametrization,
    config: &OptimizerConfig,
) -> Result<FitResult> {
    config.validate()?;
    let table = CandidateTable::shared(parametrization, config);
    nmle_fit_with(data, &table, config)
}

/// [`nmle_fit`] with a prebuilt candidate table.
pub fn nmle_fit_with(
    data: &[f64],
    table: &CandidateTable,
    config: &OptimizerConfig,
) -> Result<FitResult> {
    check_sample(data)?;
    let sorted = sorted_copy(data);
    let (init, initializer) = initial_candidate(&sorted, table)?;
    fit_sorted(&sorted, init, initializer, config)
}

/// Completes the ranked candidates in turn and returns the first one that is
/// valid and whose support covers the sample.
pub(crate) fn initial_candidate(
    sorted: &[f64],
    table: &CandidateTable,
) -> Result<(GldParams, Initializer)> {
    let (lo, hi) = (sorted[0], sorted[sorted.len() - 1]);
    let (target, complete): (_, Box<dyn Fn(usize) -> Option<GldParams>>) =
        match table.parametrization() {
            Parametrization::Rs => {
                let stats = percentile_stats_sorted(sorted, table.percentile_v());
                if !(stats.rho2 > 0.0) {
                    return Err(Error::DegenerateSample("percentile spread is zero".into()));
                }
                (
                    [stats.rho3, stats.rho4],
                    Box::new(move |i| {
                        let [l3, l4] = table.shape(i);
                        Some(rs_complete(&stats, l3, l4, table.percentile_v()))
                    }),
                )
            }
            Parametrization::Fkml => {
                let stats = sample_moments(sorted)?;
                (
                    [stats.skewness, stats.kurtosis],
                    Box::new(move |i| {
                        let [l3, l4] = table.shape(i);
                        fkml_complete_with_c2(&stats, l3, l4, table.scale(i))
                    }),
                )
            }
        };
    let initializer = match table.parametrization() {
        Parametrization::Rs => Initializer::Percentile,
        Parametrization::Fkml => Initializer::Moments,
    };
    for i in table.ranked(target) {
        let Some(params) = complete(i) else { continue };
        if !params.is_valid() {
            continue;
        }
        if Gld::new_unchecked(params).support().covers(lo, hi) {
            return Ok((params, initializer));
        }
    }
    Err(Error::NoAdmissibleCandidate(table.len()))
}

/// Maximum-likelihood fit started from user-supplied parameters.
pub fn nmle_fit_from(data: &[f64], init: GldParams, config: &OptimizerConfig) -> Result<FitResult> {
    config.validate()?;
    check_sample(data)?;
    fit_sorted(&sorted_copy(data), init, Initializer::User, config)
}

fn simplex_steps(x: &[f64; 4], spread: f64) -> [f64; 4] {
    let rel = |v: f64, floor: f64| 0.05 * v.abs().max(floor);
    [
        rel(x[0], spread),
        rel(x[1], 1e-3),
        rel(x[2], 0.05),
        rel(x[3], 0.05),
    ]
}

fn fit_sorted(
    sorted: &[f64],
    init: GldParams,
    initializer: Initializer,
    config: &OptimizerConfig,
) -> Result<FitResult> {
    let gld = Gld::new(init)?;
    let mut guesses = Vec::new();
    let init_loglik = gld.log_likelihood_warm(sorted, &mut guesses);
    if init_loglik == f64::NEG_INFINITY {
        return Err(Error::InvalidArgument(
            "initial parameters exclude some observations".into(),
        ));
    }
    let parametrization = init.parametrization;
    let objective = |x: &[f64]| {
        let p = GldParams::new(parametrization, x[0], x[1], x[2], x[3]);
        if !p.is_valid() {
            return f64::INFINITY;
        }
        let g = Gld::new_unchecked(p);
        let s = g.support();
        if !s.covers(sorted[0], sorted[sorted.len() - 1]) {
            return f64::INFINITY;
        }
        -g.log_likelihood_warm(sorted, &mut guesses)
    };
    let x0 = init.as_array();
    let steps = simplex_steps(&x0, sd(sorted));
    let m = minimize_with_restarts(objective, &x0, &steps, &config.simplex(), config.restarts);
    let params = GldParams::new(parametrization, m.x[0], m.x[1], m.x[2], m.x[3]);
    let loglik = -m.value;
    if !loglik.is_finite() || !params.is_valid() {
        return Err(Error::NonConvergence("likelihood is not finite".into()));
    }
    Ok(FitResult {
        params,
        loglik,
        converged: m.converged,
        iterations: m.iterations,
        initializer,
        init_params: init,
        init_loglik,
    })
}
