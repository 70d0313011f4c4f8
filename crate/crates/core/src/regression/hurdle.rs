use super::ci::{simulate_coefficient_cis, CiOptions, CoefficientCi};
use super::gld_fit::{gld_regression_fit_with, RegressionFit};
use super::logistic::{logistic_fit, LogisticFit};
use super::DesignMatrix;
use crate::error::{Error, Result};
use crate::fitting::{CandidateTable, OptimizerConfig};
use crate::gld::Parametrization;

/// Logistic model for the zero indicator plus GλD regression on the
/// non-zero rows.
#[derive(Debug, Clone, PartialEq)]
pub struct HurdleRegressionFit {
    /// Fails when the data has no zeros (or only zeros).
    pub zero_part: Result<LogisticFit>,
    pub nonzero_part: RegressionFit,
    /// Present when intervals were requested and the non-zero fit converged.
    pub nonzero_cis: Option<CoefficientCi>,
    pub zero_count: usize,
    pub n: usize,
}

/// `w` covers the non-zero part and `z` the zero part; both have one row per
/// element of `y`. The two factors are fitted on disjoint data.
pub fn hurdle_regression_fit(
    w: &DesignMatrix,
    z: &DesignMatrix,
    y: &[f64],
    parametrization: Parametrization,
    config: &OptimizerConfig,
    ci: Option<&CiOptions>,
) -> Result<HurdleRegressionFit> {
    if w.nrows() != y.len() || z.nrows() != y.len() {
        return Err(Error::InvalidArgument("design rows differ from response length".into()));
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("non-finite response".into()));
    }
    config.validate()?;
    let v: Vec<bool> = y.iter().map(|&yi| yi == 0.0).collect();
    let zero_part = logistic_fit(z, &v);

    let w_nz = w.select_rows(|i| !v[i]);
    let y_nz: Vec<f64> = y.iter().copied().filter(|&yi| yi != 0.0).collect();
    let table = CandidateTable::shared(parametrization, config);
    let nonzero_part = gld_regression_fit_with(&w_nz, &y_nz, &table, config)?;
    let nonzero_cis = match ci {
        Some(opts) if nonzero_part.converged => {
            Some(simulate_coefficient_cis(&nonzero_part, &w_nz, config, opts)?)
        }
        _ => None,
    };
    Ok(HurdleRegressionFit {
        zero_part,
        nonzero_part,
        nonzero_cis,
        zero_count: v.iter().filter(|&&b| b).count(),
        n: y.len(),
    })
}
