//! Generalized Pareto baseline: distribution functions, maximum likelihood
//! with a known threshold, a log-link GLM on the mean, the hurdle variant and
//! its residuals.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fitting::OptimizerConfig;
use crate::hurdle::split;
use crate::numerics::derivatives::{hessian, newton_polish};
use crate::numerics::nelder_mead::minimize_with_restarts;
use crate::numerics::{mean, normal_cdf, normal_quantile};
use crate::regression::{logistic_fit, ols_fit, DesignMatrix, LogisticFit};

/// Below this `|xi|` the exponential forms are used.
pub const XI_ZERO: f64 = 1e-10;
/// Largest shape the GLM may reach; the mean needs `xi < 1`.
pub const XI_MAX: f64 = 1.0 - 1e-6;
/// Shapes at or below -1 make the likelihood unbounded at the upper endpoint.
pub const XI_MIN: f64 = -1.0;
pub const MIN_GPD_FIT_SIZE: usize = 5;
const POLISH_ITER: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GpdParams {
    pub alpha: f64,
    pub tau: f64,
    pub xi: f64,
}

impl GpdParams {
    pub fn new(alpha: f64, tau: f64, xi: f64) -> Result<Self> {
        if !(tau > 0.0) || !tau.is_finite() {
            return Err(Error::InvalidParams(format!("GPD scale tau = {tau}")));
        }
        if !(alpha >= 0.0) || !alpha.is_finite() || !xi.is_finite() {
            return Err(Error::InvalidParams(format!("GPD alpha = {alpha}, xi = {xi}")));
        }
        Ok(Self { alpha, tau, xi })
    }

    /// From the mean: `tau = (mu - alpha)(1 - xi)`.
    pub fn from_mean(alpha: f64, mu: f64, xi: f64) -> Result<Self> {
        if !(xi < 1.0) {
            return Err(Error::InvalidParams(format!("mean form needs xi < 1, got {xi}")));
        }
        if !(mu > alpha) {
            return Err(Error::InvalidParams(format!("mean {mu} not above threshold {alpha}")));
        }
        Self::new(alpha, (mu - alpha) * (1.0 - xi), xi)
    }

    /// Upper end of the support, finite only for negative shape.
    pub fn upper(&self) -> f64 {
        if self.xi < -XI_ZERO {
            self.alpha - self.tau / self.xi
        } else {
            f64::INFINITY
        }
    }

    pub fn ln_pdf(&self, y: f64) -> f64 {
        if !(y >= self.alpha) {
            return f64::NEG_INFINITY;
        }
        let z = (y - self.alpha) / self.tau;
        if self.xi.abs() < XI_ZERO {
            return -self.tau.ln() - z;
        }
        let t = self.xi * z;
        if t <= -1.0 {
            return f64::NEG_INFINITY;
        }
        -self.tau.ln() - (1.0 + 1.0 / self.xi) * t.ln_1p()
    }

    pub fn pdf(&self, y: f64) -> f64 {
        if self.xi < -XI_ZERO && y == self.upper() {
            // Endpoint density: 0, 1/tau or unbounded as xi is above, at or below -1.
            return match self.xi.partial_cmp(&-1.0) {
                Some(std::cmp::Ordering::Greater) => 0.0,
                Some(std::cmp::Ordering::Equal) => 1.0 / self.tau,
                _ => f64::INFINITY,
            };
        }
        self.ln_pdf(y).exp()
    }

    pub fn cdf(&self, y: f64) -> f64 {
        if !(y > self.alpha) {
            return 0.0;
        }
        let z = (y - self.alpha) / self.tau;
        if self.xi.abs() < XI_ZERO {
            return -(-z).exp_m1();
        }
        let t = self.xi * z;
        if t <= -1.0 {
            return 1.0;
        }
        -(-t.ln_1p() / self.xi).exp_m1()
    }

    /// Survival function `1 - F(y)` without cancellation in the tail.
    pub fn sf(&self, y: f64) -> f64 {
        if !(y > self.alpha) {
            return 1.0;
        }
        let z = (y - self.alpha) / self.tau;
        if self.xi.abs() < XI_ZERO {
            return (-z).exp();
        }
        let t = self.xi * z;
        if t <= -1.0 {
            return 0.0;
        }
        (-t.ln_1p() / self.xi).exp()
    }

    pub fn quantile(&self, u: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&u) {
            return Err(Error::ProbabilityOutOfRange(u));
        }
        if u == 1.0 {
            return Ok(self.upper());
        }
        let l = (-u).ln_1p();
        if self.xi.abs() < XI_ZERO {
            return Ok(self.alpha - self.tau * l);
        }
        Ok(self.alpha + self.tau * (-self.xi * l).exp_m1() / self.xi)
    }

    pub fn mean(&self) -> Result<f64> {
        if !(self.xi < 1.0) {
            return Err(Error::MomentDoesNotExist {
                k: 1,
                lambda3: self.xi,
                lambda4: self.xi,
            });
        }
        Ok(self.alpha + self.tau / (1.0 - self.xi))
    }

    pub fn sample<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Vec<f64> {
        (0..n)
            .map(|_| {
                let u: f64 = rng.random();
                self.quantile(u).expect("u in [0, 1)")
            })
            .collect()
    }

    pub fn log_likelihood(&self, data: &[f64]) -> f64 {
        let mut total = 0.0;
        for &y in data {
            let l = self.ln_pdf(y);
            if l == f64::NEG_INFINITY {
                return l;
            }
            total += l;
        }
        total
    }
}

pub fn gpd_pdf(params: &GpdParams, y: f64) -> Result<f64> {
    Ok(GpdParams::new(params.alpha, params.tau, params.xi)?.pdf(y))
}

pub fn gpd_cdf(params: &GpdParams, y: f64) -> Result<f64> {
    Ok(GpdParams::new(params.alpha, params.tau, params.xi)?.cdf(y))
}

pub fn gpd_quantile(params: &GpdParams, u: f64) -> Result<f64> {
    GpdParams::new(params.alpha, params.tau, params.xi)?.quantile(u)
}

pub fn gpd_sample<R: Rng + ?Sized>(params: &GpdParams, n: usize, rng: &mut R) -> Result<Vec<f64>> {
    Ok(GpdParams::new(params.alpha, params.tau, params.xi)?.sample(n, rng))
}

pub fn gpd_mean(params: &GpdParams) -> Result<f64> {
    GpdParams::new(params.alpha, params.tau, params.xi)?.mean()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GpdFit {
    pub params: GpdParams,
    pub loglik: f64,
    pub converged: bool,
    pub iterations: usize,
}

fn check_sample(data: &[f64], alpha: f64) -> Result<()> {
    if !(alpha >= 0.0) || !alpha.is_finite() {
        return Err(Error::InvalidParams(format!("GPD threshold {alpha}")));
    }
    if data.len() < MIN_GPD_FIT_SIZE {
        return Err(Error::InsufficientData(format!(
            "{} observations, need {MIN_GPD_FIT_SIZE}",
            data.len()
        )));
    }
    if let Some(y) = data.iter().find(|&&y| !(y >= alpha) || !y.is_finite()) {
        return Err(Error::InvalidArgument(format!("value {y} below threshold {alpha}")));
    }
    if data.iter().all(|&y| y == alpha) {
        return Err(Error::DegenerateSample("all values equal the threshold".into()));
    }
    Ok(())
}

/// Moment estimates of `(xi, tau)` from the excesses, or the exponential
/// fit when they fall outside the feasible region.
fn moment_start(data: &[f64], alpha: f64) -> (f64, f64) {
    let excess: Vec<f64> = data.iter().map(|y| y - alpha).collect();
    let m = mean(&excess);
    let var = excess.iter().map(|e| (e - m) * (e - m)).sum::<f64>() / excess.len() as f64;
    let top = excess.iter().copied().fold(0.0, f64::max);
    if var > 0.0 {
        let r = m * m / var;
        let xi = 0.5 * (1.0 - r);
        let tau = 0.5 * m * (r + 1.0);
        if xi > -0.9 && xi < 0.9 && (xi >= 0.0 || top < -tau / xi) {
            return (xi, tau);
        }
    }
    (0.0, m)
}

/// Maximum likelihood for `(xi, tau)` at a known threshold. The simplex runs
/// over `(xi, ln tau)`; points outside the support give `-inf`.
pub fn gpd_mle_fit(data: &[f64], alpha: f64, config: &OptimizerConfig) -> Result<GpdFit> {
    check_sample(data, alpha)?;
    config.validate()?;
    let objective = |p: &[f64]| {
        if !(p[0] > XI_MIN) {
            return f64::INFINITY;
        }
        let params = GpdParams {
            alpha,
            tau: p[1].exp(),
            xi: p[0],
        };
        -params.log_likelihood(data)
    };
    let (xi0, tau0) = moment_start(data, alpha);
    let x0 = [xi0, tau0.ln()];
    let m = minimize_with_restarts(objective, &x0, &[0.1, 0.1], &config.simplex(), config.restarts);
    if !m.value.is_finite() {
        return Err(Error::NonConvergence("GPD likelihood is -inf everywhere visited".into()));
    }
    let (x, value) = newton_polish(objective, &m.x, &[1e-5, 1e-5], POLISH_ITER);
    let (x, value) = if value <= m.value { (x, value) } else { (m.x.clone(), m.value) };
    Ok(GpdFit {
        params: GpdParams {
            alpha,
            tau: x[1].exp(),
            xi: x[0],
        },
        loglik: -value,
        converged: m.converged,
        iterations: m.iterations,
    })
}

/// Log-link GLM: `mu_i = exp(x_i' beta)` with a common shape.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GpdGlmFit {
    pub alpha: f64,
    pub xi: f64,
    pub beta: Vec<f64>,
    /// Standard errors of `(xi, beta...)`; absent when the observed
    /// information is not positive definite.
    pub std_errors: Option<Vec<f64>>,
    /// Two-sided normal p-values for `(xi, beta...)` against zero.
    pub p_values: Option<Vec<f64>>,
    pub loglik: f64,
    pub converged: bool,
    pub iterations: usize,
}

impl GpdGlmFit {
    pub fn means(&self, x: &DesignMatrix) -> Vec<f64> {
        x.predict(&self.beta).into_iter().map(f64::exp).collect()
    }

    /// Law of the error residuals under a correct model: threshold 0, mean 1.
    pub fn error_reference(&self) -> GpdParams {
        GpdParams {
            alpha: 0.0,
            tau: 1.0 - self.xi,
            xi: self.xi,
        }
    }
}

fn glm_loglik(theta: &[f64], x: &DesignMatrix, y: &[f64], alpha: f64) -> f64 {
    let xi = theta[0];
    if !(xi > XI_MIN && xi < XI_MAX) {
        return f64::NEG_INFINITY;
    }
    let beta = &theta[1..];
    let m = x.values();
    let mut total = 0.0;
    for (i, &yi) in y.iter().enumerate() {
        let eta: f64 = m.row(i).iter().zip(beta).map(|(a, b)| a * b).sum();
        let mu = eta.exp();
        if !(mu > alpha) || !mu.is_finite() {
            return f64::NEG_INFINITY;
        }
        let p = GpdParams {
            alpha,
            tau: (mu - alpha) * (1.0 - xi),
            xi,
        };
        let l = p.ln_pdf(yi);
        if l == f64::NEG_INFINITY {
            return l;
        }
        total += l;
    }
    total
}

fn glm_start(x: &DesignMatrix, y: &[f64], alpha: f64, config: &OptimizerConfig) -> Result<Vec<f64>> {
    let pooled = gpd_mle_fit(y, alpha, config)?;
    let mut candidates = Vec::new();
    let logs: Vec<f64> = y.iter().map(|&v| (v - alpha).max(f64::MIN_POSITIVE).ln()).collect();
    if let Ok(ols) = ols_fit(x, &logs) {
        let mut beta = ols.beta;
        if x.has_intercept() {
            // Keep the log-linear slopes, move the intercept so the average
            // fitted excess matches the sample.
            let level: Vec<f64> = x.predict(&beta).into_iter().map(f64::exp).collect();
            beta[0] += (mean(y) - alpha).ln() - mean(&level).ln();
            let mu_min = x.predict(&beta).into_iter().map(f64::exp).fold(f64::INFINITY, f64::min);
            if mu_min <= alpha {
                beta[0] += (alpha / mu_min).ln() + 0.1;
            }
        }
        candidates.push(beta);
    }
    if x.has_intercept() {
        let mut beta = vec![0.0; x.ncols()];
        beta[0] = pooled.params.mean().unwrap_or_else(|_| mean(y)).ln();
        candidates.push(beta);
    }
    let xi = pooled.params.xi.min(0.9);
    for beta in candidates {
        for shape in [xi, xi.max(0.0), 0.5] {
            let theta = [vec![shape], beta.clone()].concat();
            if glm_loglik(&theta, x, y, alpha).is_finite() {
                return Ok(theta);
            }
        }
    }
    Err(Error::NonConvergence("no feasible starting point for the GPD GLM".into()))
}

/// Joint maximum likelihood over `(xi, beta)`, `tau_i = (mu_i - alpha)(1 - xi)`.
pub fn gpd_glm_fit(
    x: &DesignMatrix,
    y: &[f64],
    alpha: f64,
    config: &OptimizerConfig,
) -> Result<GpdGlmFit> {
    if x.nrows() != y.len() {
        return Err(Error::InvalidArgument("design rows differ from response length".into()));
    }
    check_sample(y, alpha)?;
    config.validate()?;
    x.check_rank()?;
    let theta0 = glm_start(x, y, alpha, config)?;
    let objective = |t: &[f64]| -glm_loglik(t, x, y, alpha);
    let steps: Vec<f64> = theta0.iter().map(|v| 0.1 * v.abs().max(0.5)).collect();
    let m = minimize_with_restarts(objective, &theta0, &steps, &config.simplex(), config.restarts);
    if !m.value.is_finite() {
        return Err(Error::NonConvergence("GPD GLM likelihood not finite".into()));
    }
    let h_steps: Vec<f64> = m.x.iter().map(|v| 1e-5 * v.abs().max(1.0)).collect();
    let (theta, value) = newton_polish(objective, &m.x, &h_steps, POLISH_ITER);
    let (theta, value) = if value <= m.value { (theta, value) } else { (m.x.clone(), m.value) };

    let h_steps: Vec<f64> = theta.iter().map(|v| 1e-5 * v.abs().max(1.0)).collect();
    let info = hessian(objective, &theta, &h_steps);
    let std_errors = info
        .cholesky()
        .map(|c| c.inverse())
        .map(|cov| cov.diagonal().iter().map(|v| v.sqrt()).collect::<Vec<f64>>())
        .filter(|se| se.iter().all(|s| s.is_finite() && *s > 0.0));
    let p_values = std_errors.as_ref().map(|se| {
        theta
            .iter()
            .zip(se)
            .map(|(t, s)| 2.0 * normal_cdf(-(t / s).abs()))
            .collect()
    });
    Ok(GpdGlmFit {
        alpha,
        xi: theta[0],
        beta: theta[1..].to_vec(),
        std_errors,
        p_values,
        loglik: -value,
        converged: m.converged,
        iterations: m.iterations,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct HurdleGpdFit {
    pub lambda0: f64,
    pub zero_count: usize,
    pub n: usize,
    /// Fails when the non-zero values cannot support a fit.
    pub continuous: Result<GpdFit>,
}

/// Zero proportion plus a GPD fitted to the non-zero values.
pub fn hurdle_gpd_fit(data: &[f64], alpha: f64, config: &OptimizerConfig) -> Result<HurdleGpdFit> {
    if data.is_empty() {
        return Err(Error::InsufficientData("empty sample".into()));
    }
    let s = split(data);
    Ok(HurdleGpdFit {
        lambda0: s.zero_count as f64 / data.len() as f64,
        zero_count: s.zero_count,
        n: data.len(),
        continuous: gpd_mle_fit(&s.nonzero_values, alpha, config),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct HurdleGpdRegressionFit {
    /// Fails when the data has no zeros (or only zeros).
    pub zero_part: Result<LogisticFit>,
    pub nonzero_part: GpdGlmFit,
    pub zero_count: usize,
    pub n: usize,
}

/// Logistic model for the zero indicator on `z`, GPD GLM on `x` for the
/// non-zero rows.
pub fn hurdle_gpd_regression_fit(
    x: &DesignMatrix,
    z: &DesignMatrix,
    y: &[f64],
    alpha: f64,
    config: &OptimizerConfig,
) -> Result<HurdleGpdRegressionFit> {
    if x.nrows() != y.len() || z.nrows() != y.len() {
        return Err(Error::InvalidArgument("design rows differ from response length".into()));
    }
    let v: Vec<bool> = y.iter().map(|&yi| yi == 0.0).collect();
    let zero_part = logistic_fit(z, &v);
    let x_nz = x.select_rows(|i| !v[i]);
    let y_nz: Vec<f64> = y.iter().copied().filter(|&yi| yi != 0.0).collect();
    let nonzero_part = gpd_glm_fit(&x_nz, &y_nz, alpha, config)?;
    Ok(HurdleGpdRegressionFit {
        zero_part,
        nonzero_part,
        zero_count: v.iter().filter(|&&b| b).count(),
        n: y.len(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GpdResiduals {
    /// `(y - alpha) / mu_i`. Follows the reference law only when `alpha = 0`.
    pub error: Vec<f64>,
    /// `(y - alpha) / (mu_i - alpha)`, which follows the reference law for
    /// any threshold.
    pub excess: Vec<f64>,
    /// `Phi^-1(F_i(y))`; `-inf` at the threshold.
    pub quantile: Vec<f64>,
    /// Rows whose response sits on the threshold.
    pub at_threshold: Vec<usize>,
}

pub fn gpd_residuals(fit: &GpdGlmFit, x: &DesignMatrix, y: &[f64]) -> Result<GpdResiduals> {
    if x.nrows() != y.len() {
        return Err(Error::InvalidArgument("design rows differ from response length".into()));
    }
    if !fit.converged {
        return Err(Error::NonConvergence("residuals need a converged fit".into()));
    }
    let alpha = fit.alpha;
    let mu = fit.means(x);
    let mut out = GpdResiduals {
        error: Vec::with_capacity(y.len()),
        excess: Vec::with_capacity(y.len()),
        quantile: Vec::with_capacity(y.len()),
        at_threshold: Vec::new(),
    };
    for (i, (&yi, &mi)) in y.iter().zip(&mu).enumerate() {
        if !(yi >= alpha) {
            return Err(Error::InvalidArgument(format!("value {yi} below threshold {alpha}")));
        }
        let p = GpdParams::from_mean(alpha, mi, fit.xi)?;
        out.error.push((yi - alpha) / mi);
        out.excess.push((yi - alpha) / (mi - alpha));
        // The survival form keeps precision in the upper tail.
        let (cdf, sf) = (p.cdf(yi), p.sf(yi));
        let r = if cdf <= 0.5 { normal_quantile(cdf) } else { -normal_quantile(sf) };
        out.quantile.push(r);
        if yi == alpha {
            out.at_threshold.push(i);
        }
    }
    Ok(out)
}
