//! Location regression with GλD errors, logistic regression for the zero
//! indicator, and their hurdle combination.

mod ci;
mod gld_fit;
mod hurdle;
mod logistic;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gld::Parametrization;
use crate::numerics::{sorted_copy, type8_sorted};

pub use ci::{replicate_rng, simulate_coefficient_cis, CiOptions, CoefficientCi, CoefficientInterval};
pub use gld_fit::{
    gld_regression_fit, gld_regression_fit_with, regression_residuals, RegressionFit,
    RegressionResiduals,
};
pub use hurdle::{hurdle_regression_fit, HurdleRegressionFit};
pub use logistic::{logistic_fit, logistic_score, LogisticFit, SEPARATION_THRESHOLD};

/// Relative singular-value cutoff below which a design is rank deficient.
const RANK_TOL: f64 = 1e-10;

/// Covariate matrix, one row per observation.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignMatrix {
    values: DMatrix<f64>,
    intercept: bool,
}

impl DesignMatrix {
    /// Wraps `values`; `intercept` declares that column 0 is all ones.
    pub fn new(values: DMatrix<f64>, intercept: bool) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("design matrix has non-finite entries".into()));
        }
        if intercept && (values.ncols() == 0 || values.column(0).iter().any(|&v| v != 1.0)) {
            return Err(Error::InvalidArgument("intercept column must be all ones".into()));
        }
        Ok(Self { values, intercept })
    }

    /// Intercept column followed by the given covariate columns.
    pub fn with_intercept(columns: &[&[f64]], n: usize) -> Result<Self> {
        if columns.iter().any(|c| c.len() != n) {
            return Err(Error::InvalidArgument("covariate columns differ in length".into()));
        }
        let m = DMatrix::from_fn(n, columns.len() + 1, |i, j| {
            if j == 0 {
                1.0
            } else {
                columns[j - 1][i]
            }
        });
        Self::new(m, true)
    }

    pub fn intercept_only(n: usize) -> Self {
        Self {
            values: DMatrix::from_element(n, 1, 1.0),
            intercept: true,
        }
    }

    pub fn nrows(&self) -> usize {
        self.values.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.values.ncols()
    }

    pub fn has_intercept(&self) -> bool {
        self.intercept
    }

    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    pub fn row(&self, i: usize) -> Vec<f64> {
        self.values.row(i).iter().copied().collect()
    }

    /// Rows whose index satisfies `keep`, in order.
    pub fn select_rows(&self, keep: impl Fn(usize) -> bool) -> Self {
        let idx: Vec<usize> = (0..self.nrows()).filter(|&i| keep(i)).collect();
        Self {
            values: self.values.select_rows(idx.iter()),
            intercept: self.intercept,
        }
    }

    /// `W beta`.
    pub fn predict(&self, beta: &[f64]) -> Vec<f64> {
        let b = DVector::from_column_slice(beta);
        (&self.values * b).iter().copied().collect()
    }

    pub(crate) fn check_rank(&self) -> Result<()> {
        if self.nrows() <= self.ncols() {
            return Err(Error::InsufficientData(format!(
                "{} rows for {} columns",
                self.nrows(),
                self.ncols()
            )));
        }
        let sv = self.values.singular_values();
        let max = sv.max();
        if !(max > 0.0) || sv.min() <= RANK_TOL * max {
            return Err(Error::RankDeficient);
        }
        Ok(())
    }
}

/// Least-squares coefficients, residuals and classical standard errors.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OlsFit {
    pub beta: Vec<f64>,
    pub residuals: Vec<f64>,
    pub std_errors: Vec<f64>,
}

pub fn ols_fit(w: &DesignMatrix, x: &[f64]) -> Result<OlsFit> {
    if x.len() != w.nrows() {
        return Err(Error::InvalidArgument("response length differs from design rows".into()));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("non-finite response".into()));
    }
    w.check_rank()?;
    let m = w.values();
    let y = DVector::from_column_slice(x);
    let svd = m.clone().svd(true, true);
    let beta = svd
        .solve(&y, 0.0)
        .map_err(|e| Error::InvalidArgument(e.to_string()))?;
    let fitted = m * &beta;
    let residuals: Vec<f64> = (&y - fitted).iter().copied().collect();
    let dof = (w.nrows() - w.ncols()) as f64;
    let sigma2 = residuals.iter().map(|r| r * r).sum::<f64>() / dof;
    // (W^T W)^-1 = V S^-2 V^T.
    let v_t = svd.v_t.as_ref().expect("requested V^T");
    let std_errors = (0..w.ncols())
        .map(|j| {
            let var: f64 = svd
                .singular_values
                .iter()
                .enumerate()
                .map(|(k, s)| (v_t[(k, j)] / s).powi(2))
                .sum();
            (sigma2 * var).sqrt()
        })
        .collect();
    Ok(OlsFit {
        beta: beta.iter().copied().collect(),
        residuals,
        std_errors,
    })
}

/// Location that makes the GλD with the given shape zero-mean.
pub fn lambda1_star(
    lambda2: f64,
    lambda3: f64,
    lambda4: f64,
    parametrization: Parametrization,
) -> Result<f64> {
    if !(lambda3.min(lambda4) > -1.0) {
        return Err(Error::MomentDoesNotExist {
            k: 1,
            lambda3,
            lambda4,
        });
    }
    if lambda2 == 0.0 || !lambda2.is_finite() {
        return Err(Error::InvalidParams(format!("lambda2 = {lambda2}")));
    }
    let d = (1.0 / (lambda3 + 1.0) - 1.0 / (lambda4 + 1.0)) / lambda2;
    Ok(match parametrization {
        Parametrization::Rs => -d,
        Parametrization::Fkml => d,
    })
}

/// Hyndman-Fan type-8 sample quantile.
pub fn quantile_type8(sample: &[f64], p: f64) -> Result<f64> {
    if sample.is_empty() {
        return Err(Error::InsufficientData("empty sample".into()));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::ProbabilityOutOfRange(p));
    }
    Ok(type8_sorted(&sorted_copy(sample), p))
}
