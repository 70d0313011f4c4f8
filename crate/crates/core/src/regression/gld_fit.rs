use serde::Serialize;

use super::{lambda1_star, ols_fit, DesignMatrix};
use crate::error::{Error, Result};
use crate::fitting::{nmle_fit_with, CandidateTable, OptimizerConfig, MIN_FIT_SIZE};
use crate::gld::{Gld, GldParams, Parametrization};
use crate::numerics::nelder_mead::minimize_with_restarts;
use crate::numerics::normal_quantile;

/// Attempts at widening the initial error distribution until it covers
/// every residual.
const WIDEN_ATTEMPTS: usize = 200;
const WIDEN_FACTOR: f64 = 0.9;

/// Location regression `x = W beta + e` with zero-mean GλD errors.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegressionFit {
    pub beta: Vec<f64>,
    pub lambda1_star: f64,
    pub lambda2: f64,
    pub lambda3: f64,
    pub lambda4: f64,
    pub parametrization: Parametrization,
    pub loglik: f64,
    pub converged: bool,
    pub iterations: usize,
    pub init_beta: Vec<f64>,
    pub init_error: GldParams,
    pub init_loglik: f64,
}

impl RegressionFit {
    /// The fitted zero-mean error distribution.
    pub fn error_params(&self) -> GldParams {
        GldParams::new(
            self.parametrization,
            self.lambda1_star,
            self.lambda2,
            self.lambda3,
            self.lambda4,
        )
    }
}

pub fn gld_regression_fit(
    w: &DesignMatrix,
    x: &[f64],
    parametrization: Parametrization,
    config: &OptimizerConfig,
) -> Result<RegressionFit> {
    config.validate()?;
    let table = CandidateTable::shared(parametrization, config);
    gld_regression_fit_with(w, x, &table, config)
}

/// Negative log-likelihood of the centred residuals. `theta` holds the free
/// coefficients followed by `(lambda2, lambda3, lambda4)`.
struct Objective<'a> {
    w: &'a DesignMatrix,
    x: &'a [f64],
    free: Vec<usize>,
    parametrization: Parametrization,
    residuals: Vec<f64>,
    guesses: Vec<f64>,
}

impl Objective<'_> {
    /// Residuals of the free part and their mean.
    fn raw_residuals(&mut self, theta: &[f64]) -> f64 {
        let m = self.w.values();
        let n = self.x.len();
        self.residuals.clear();
        for i in 0..n {
            let mut r = self.x[i];
            for (k, &j) in self.free.iter().enumerate() {
                r -= m[(i, j)] * theta[k];
            }
            self.residuals.push(r);
        }
        self.residuals.iter().sum::<f64>() / n as f64
    }

    fn value(&mut self, theta: &[f64]) -> f64 {
        let p = self.free.len();
        let (l2, l3, l4) = (theta[p], theta[p + 1], theta[p + 2]);
        let Ok(l1) = lambda1_star(l2, l3, l4, self.parametrization) else {
            return f64::INFINITY;
        };
        let params = GldParams::new(self.parametrization, l1, l2, l3, l4);
        if !params.is_valid() {
            return f64::INFINITY;
        }
        let mean = self.raw_residuals(theta);
        let gld = Gld::new_unchecked(params);
        let support = gld.support();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for r in self.residuals.iter_mut() {
            *r -= mean;
            lo = lo.min(*r);
            hi = hi.max(*r);
        }
        if !support.covers(lo, hi) {
            return f64::INFINITY;
        }
        -gld.log_likelihood_warm(&self.residuals, &mut self.guesses)
    }
}

/// [`gld_regression_fit`] with a prebuilt candidate table.
///
/// Centring the residuals makes the likelihood flat along the intercept, so
/// with an intercept column the simplex runs over the slopes only and the
/// intercept is the mean of `x - slopes . w`.
pub fn gld_regression_fit_with(
    w: &DesignMatrix,
    x: &[f64],
    table: &CandidateTable,
    config: &OptimizerConfig,
) -> Result<RegressionFit> {
    if x.len() < MIN_FIT_SIZE {
        return Err(Error::InsufficientData(format!(
            "need at least {MIN_FIT_SIZE} observations, got {}",
            x.len()
        )));
    }
    let ols = ols_fit(w, x)?;
    let error_init = nmle_fit_with(&ols.residuals, table, config)?;
    let parametrization = table.parametrization();

    let free: Vec<usize> = if w.has_intercept() {
        (1..w.ncols()).collect()
    } else {
        (0..w.ncols()).collect()
    };
    let p = free.len();
    let mut objective = Objective {
        w,
        x,
        free: free.clone(),
        parametrization,
        residuals: Vec::with_capacity(x.len()),
        guesses: Vec::new(),
    };

    let ep = error_init.params;
    let mut theta0: Vec<f64> = free.iter().map(|&j| ols.beta[j]).collect();
    theta0.extend([ep.lambda2, ep.lambda3, ep.lambda4]);
    let mut init_value = objective.value(&theta0);
    for _ in 0..WIDEN_ATTEMPTS {
        if init_value.is_finite() {
            break;
        }
        theta0[p] *= WIDEN_FACTOR;
        init_value = objective.value(&theta0);
    }
    if !init_value.is_finite() {
        return Err(Error::NonConvergence(
            "no starting error distribution covers the residuals".into(),
        ));
    }

    let mut steps: Vec<f64> = free
        .iter()
        .map(|&j| ols.std_errors[j].max(1e-6 * ols.beta[j].abs()).max(1e-12))
        .collect();
    steps.extend([
        0.05 * theta0[p].abs().max(1e-3),
        0.05 * theta0[p + 1].abs().max(0.05),
        0.05 * theta0[p + 2].abs().max(0.05),
    ]);
    let m = minimize_with_restarts(
        |t| objective.value(t),
        &theta0,
        &steps,
        &config.simplex(),
        config.restarts,
    );
    if !m.value.is_finite() {
        return Err(Error::NonConvergence("likelihood is not finite".into()));
    }

    let intercept = objective.raw_residuals(&m.x);
    let mut beta = vec![0.0; w.ncols()];
    for (k, &j) in free.iter().enumerate() {
        beta[j] = m.x[k];
    }
    if w.has_intercept() {
        beta[0] = intercept;
    }
    let init_intercept = objective.raw_residuals(&theta0);
    let mut init_beta = ols.beta.clone();
    if w.has_intercept() {
        init_beta[0] = init_intercept;
    }
    let (l2, l3, l4) = (m.x[p], m.x[p + 1], m.x[p + 2]);
    let l1 = lambda1_star(l2, l3, l4, parametrization)?;
    let init_l1 = lambda1_star(theta0[p], theta0[p + 1], theta0[p + 2], parametrization)?;
    Ok(RegressionFit {
        beta,
        lambda1_star: l1,
        lambda2: l2,
        lambda3: l3,
        lambda4: l4,
        parametrization,
        loglik: -m.value,
        converged: m.converged,
        iterations: m.iterations,
        init_beta,
        init_error: GldParams::new(parametrization, init_l1, theta0[p], theta0[p + 1], theta0[p + 2]),
        init_loglik: -init_value,
    })
}

/// Raw residuals `y - W beta` and their normalised quantile residuals.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegressionResiduals {
    pub error: Vec<f64>,
    pub quantile: Vec<f64>,
    /// Residual falls outside the fitted support (quantile residual infinite).
    pub outside_support: Vec<bool>,
}

pub fn regression_residuals(
    fit: &RegressionFit,
    w: &DesignMatrix,
    y: &[f64],
) -> Result<RegressionResiduals> {
    if y.len() != w.nrows() || fit.beta.len() != w.ncols() {
        return Err(Error::InvalidArgument("dimension mismatch".into()));
    }
    let gld = Gld::new(fit.error_params())?;
    let support = gld.support();
    let error: Vec<f64> = y
        .iter()
        .zip(w.predict(&fit.beta))
        .map(|(yi, f)| yi - f)
        .collect();
    let outside_support = error.iter().map(|&e| !support.contains(e)).collect();
    let quantile = error.iter().map(|&e| normal_quantile(gld.cdf(e))).collect();
    Ok(RegressionResiduals {
        error,
        quantile,
        outside_support,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn small_config() -> OptimizerConfig {
        OptimizerConfig {
            n_candidates: 2000,
            ..Default::default()
        }
    }

    #[test]
    fn near_noiseless_recovery() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let n = 400;
        let x1: Vec<f64> = (0..n).map(|i| (i as f64 * 0.731).sin() * 3.0).collect();
        let w = DesignMatrix::with_intercept(&[&x1], n).unwrap();
        let noise = Gld::new(GldParams::rs(0.0, 1000.0, 0.14, 0.14))
            .unwrap()
            .sample(n, &mut rng);
        let y: Vec<f64> = (0..n).map(|i| 2.0 - 0.5 * x1[i] + noise[i]).collect();
        let fit = gld_regression_fit(&w, &y, Parametrization::Rs, &small_config()).unwrap();
        assert!((fit.beta[0] - 2.0).abs() < 0.01 && (fit.beta[1] + 0.5).abs() < 0.01, "{fit:?}");
        assert!(fit.loglik >= fit.init_loglik - 1e-9);
        let mean = Gld::new(fit.error_params()).unwrap().mean().unwrap();
        assert!(mean.abs() < 1e-8);
    }

    #[test]
    fn residuals_with_zero_coefficients() {
        let n = 10;
        let w = DesignMatrix::intercept_only(n);
        let y: Vec<f64> = (0..n).map(|i| i as f64 * 0.1 - 0.45).collect();
        let fit = RegressionFit {
            beta: vec![0.0],
            lambda1_star: 0.0,
            lambda2: 1.0,
            lambda3: 1.0,
            lambda4: 1.0,
            parametrization: Parametrization::Rs,
            loglik: 0.0,
            converged: true,
            iterations: 0,
            init_beta: vec![0.0],
            init_error: GldParams::rs(0.0, 1.0, 1.0, 1.0),
            init_loglik: 0.0,
        };
        let r = regression_residuals(&fit, &w, &y).unwrap();
        assert_eq!(r.error, y);
        let med = regression_residuals(&fit, &w, &vec![0.0; n]).unwrap();
        assert!(med.quantile.iter().all(|q| q.abs() < 1e-12));
        let z = regression_residuals(&fit, &w, &vec![0.95; n]).unwrap();
        assert!((z.quantile[0] - 1.959963984540054).abs() < 1e-9);
        let out = regression_residuals(&fit, &w, &vec![3.0; n]).unwrap();
        assert!(out.outside_support[0] && out.quantile[0] == f64::INFINITY);
    }
}
