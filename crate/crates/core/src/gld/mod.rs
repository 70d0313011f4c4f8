//! The Generalized Lambda Distribution in its RS and FKML parametrizations.
//!
//! Both forms are defined through the quantile function `Q(u)` of a uniform
//! variate; the density is `1 / Q'(F(x))` and the CDF is recovered by
//! inverting `Q` numerically. [`GldParams`] is the raw parameter vector;
//! [`Gld`] is a vector that has passed the validity check for its
//! parametrization and exposes the distribution functions.

mod moments;
mod validity;

use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use moments::{fkml_central_moments, moment_exists};
pub use validity::rs_is_valid;

/// Below this magnitude an FKML shape parameter uses the logarithmic limit.
pub const FKML_LIMIT_THRESHOLD: f64 = 1e-8;

const CDF_MAX_ITER: usize = 300;
const CDF_ABS_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parametrization {
    Rs,
    Fkml,
}

impl fmt::Display for Parametrization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Parametrization::Rs => f.write_str("RS"),
            Parametrization::Fkml => f.write_str("FKML"),
        }
    }
}

/// Four lambdas plus the parametrization they belong to.
///
/// `lambda1` is location, `lambda2` inverse scale, `lambda3` and `lambda4`
/// control the left and right tails.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GldParams {
    pub lambda1: f64,
    pub lambda2: f64,
    pub lambda3: f64,
    pub lambda4: f64,
    pub parametrization: Parametrization,
}

impl GldParams {
    pub fn new(
        parametrization: Parametrization,
        lambda1: f64,
        lambda2: f64,
        lambda3: f64,
        lambda4: f64,
    ) -> Self {
        Self {
            lambda1,
            lambda2,
            lambda3,
            lambda4,
            parametrization,
        }
    }

    pub fn rs(lambda1: f64, lambda2: f64, lambda3: f64, lambda4: f64) -> Self {
        Self::new(Parametrization::Rs, lambda1, lambda2, lambda3, lambda4)
    }

    pub fn fkml(lambda1: f64, lambda2: f64, lambda3: f64, lambda4: f64) -> Self {
        Self::new(Parametrization::Fkml, lambda1, lambda2, lambda3, lambda4)
    }

    pub fn as_array(&self) -> [f64; 4] {
        [self.lambda1, self.lambda2, self.lambda3, self.lambda4]
    }

    pub fn with_lambda1(self, lambda1: f64) -> Self {
        Self { lambda1, ..self }
    }

    pub fn is_valid(&self) -> bool {
        let finite = self.as_array().iter().all(|v| v.is_finite());
        finite
            && match self.parametrization {
                Parametrization::Fkml => self.lambda2 > 0.0,
                Parametrization::Rs => rs_is_valid(self),
            }
    }
}

/// Closed interval `[lower, upper]` of the distribution; endpoints may be infinite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Support {
    pub lower: f64,
    pub upper: f64,
}

impl Support {
    pub fn contains(&self, x: f64) -> bool {
        x >= self.lower && x <= self.upper
    }

    pub fn covers(&self, lo: f64, hi: f64) -> bool {
        self.lower <= lo && self.upper >= hi
    }
}

/// `(x^lambda - 1) / lambda` with its `ln x` limit at `lambda = 0`.
#[inline]
fn box_cox(x: f64, lambda: f64) -> f64 {
    if lambda.abs() < FKML_LIMIT_THRESHOLD {
        x.ln()
    } else {
        (lambda * x.ln()).exp_m1() / lambda
    }
}

/// `lambda * x^(lambda - 1)` with the zero-coefficient case pinned to 0.
#[inline]
fn scaled_power_derivative(x: f64, lambda: f64) -> f64 {
    if lambda == 0.0 {
        0.0
    } else {
        lambda * x.powf(lambda - 1.0)
    }
}

/// A parameter vector that passed [`GldParams::is_valid`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Gld {
    params: GldParams,
    support: Support,
}

impl Gld {
    pub fn new(params: GldParams) -> Result<Self> {
        if !params.is_valid() {
            return Err(Error::InvalidParams(format!(
                "{} ({}, {}, {}, {}) is not a valid distribution",
                params.parametrization, params.lambda1, params.lambda2, params.lambda3, params.lambda4
            )));
        }
        Ok(Self::new_unchecked(params))
    }

    /// Skips the validity check. Callers guarantee `params.is_valid()`.
    pub(crate) fn new_unchecked(params: GldParams) -> Self {
        let mut gld = Self {
            params,
            support: Support {
                lower: f64::NEG_INFINITY,
                upper: f64::INFINITY,
            },
        };
        gld.support = Support {
            lower: gld.quantile_split(0.0, 1.0),
            upper: gld.quantile_split(1.0, 0.0),
        };
        gld
    }

    pub fn params(&self) -> &GldParams {
        &self.params
    }

    pub fn parametrization(&self) -> Parametrization {
        self.params.parametrization
    }

    pub fn support(&self) -> Support {
        self.support
    }

    /// `Q(u)` given `u` and `1 - u` separately so either tail keeps precision.
    #[inline]
    pub(crate) fn quantile_split(&self, u: f64, v: f64) -> f64 {
        let p = &self.params;
        match p.parametrization {
            Parametrization::Rs => p.lambda1 + (u.powf(p.lambda3) - v.powf(p.lambda4)) / p.lambda2,
            Parametrization::Fkml => {
                p.lambda1 + (box_cox(u, p.lambda3) - box_cox(v, p.lambda4)) / p.lambda2
            }
        }
    }

    /// `Q'(u)`, the quantile density.
    #[inline]
    pub(crate) fn quantile_density_split(&self, u: f64, v: f64) -> f64 {
        let p = &self.params;
        match p.parametrization {
            Parametrization::Rs => {
                (scaled_power_derivative(u, p.lambda3) + scaled_power_derivative(v, p.lambda4))
                    / p.lambda2
            }
            Parametrization::Fkml => {
                (u.powf(p.lambda3 - 1.0) + v.powf(p.lambda4 - 1.0)) / p.lambda2
            }
        }
    }

    /// The quantile function `Q(u)` for `u` in `[0, 1]`.
    pub fn quantile(&self, u: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&u) {
            return Err(Error::ProbabilityOutOfRange(u));
        }
        Ok(self.quantile_unchecked(u))
    }

    #[inline]
    pub(crate) fn quantile_unchecked(&self, u: f64) -> f64 {
        if u == 0.0 {
            self.support.lower
        } else if u == 1.0 {
            self.support.upper
        } else {
            self.quantile_split(u, 1.0 - u)
        }
    }

    /// `Q'(u)`; infinite at an endpoint where the density vanishes.
    pub fn quantile_density(&self, u: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&u) {
            return Err(Error::ProbabilityOutOfRange(u));
        }
        Ok(self.quantile_density_split(u, 1.0 - u))
    }

    /// `F(x)` by safeguarded Newton inversion of `Q`.
    pub fn cdf(&self, x: f64) -> f64 {
        self.cdf_from(x, 0.5)
    }

    /// `F(x)` starting the inversion at `guess`.
    pub fn cdf_from(&self, x: f64, guess: f64) -> f64 {
        if x.is_nan() {
            return f64::NAN;
        }
        if x <= self.support.lower {
            return 0.0;
        }
        if x >= self.support.upper {
            return 1.0;
        }
        let mut lo = 0.0f64;
        let mut hi = 1.0f64;
        let mut u = if guess > 0.0 && guess < 1.0 { guess } else { 0.5 };
        for _ in 0..CDF_MAX_ITER {
            let v = 1.0 - u;
            let q = self.quantile_split(u, v);
            let diff = q - x;
            if diff == 0.0 {
                return u;
            }
            if diff < 0.0 {
                lo = u;
            } else {
                hi = u;
            }
            let slope = self.quantile_density_split(u, v);
            let newton = u - diff / slope;
            let next = if slope.is_finite() && slope > 0.0 && newton > lo && newton < hi {
                newton
            } else {
                0.5 * (lo + hi)
            };
            let step = (next - u).abs();
            // Tight relative tolerance in the tails keeps the density accurate
            // where u or 1 - u is tiny.
            let tol = CDF_ABS_TOL.min(1e-10 * next.min(1.0 - next)).max(f64::MIN_POSITIVE);
            if step <= tol || next == u {
                return next;
            }
            u = next;
            if hi - lo <= tol {
                return 0.5 * (lo + hi);
            }
        }
        u
    }

    /// Density `1 / Q'(F(x))`; zero outside the support.
    pub fn pdf(&self, x: f64) -> f64 {
        if !self.support.contains(x) {
            return 0.0;
        }
        let u = self.cdf(x);
        self.density_at_probability(u)
    }

    /// `1 / Q'(u)`.
    #[inline]
    pub fn density_at_probability(&self, u: f64) -> f64 {
        let dq = self.quantile_density_split(u, 1.0 - u);
        if dq.is_finite() && dq > 0.0 {
            1.0 / dq
        } else if dq == f64::INFINITY {
            0.0
        } else {
            f64::INFINITY
        }
    }

    /// `-ln Q'(u)`, the log-density at the point with probability `u`.
    #[inline]
    pub(crate) fn log_density_at(&self, u: f64) -> f64 {
        let dq = self.quantile_density_split(u, 1.0 - u);
        if dq > 0.0 && dq.is_finite() {
            -dq.ln()
        } else {
            f64::NEG_INFINITY
        }
    }

    /// Sum of log-densities over `data`; `-inf` if any point lies outside the
    /// support.
    pub fn log_likelihood(&self, data: &[f64]) -> f64 {
        let mut total = 0.0;
        let mut guess = 0.5;
        for &x in data {
            if !self.support.contains(x) {
                return f64::NEG_INFINITY;
            }
            let u = self.cdf_from(x, guess);
            guess = u;
            total += self.log_density_at(u);
        }
        total
    }

    /// Log-likelihood with a per-observation warm start for the inversion.
    /// `guesses` is resized to `data.len()` and updated in place.
    pub fn log_likelihood_warm(&self, data: &[f64], guesses: &mut Vec<f64>) -> f64 {
        guesses.resize(data.len(), 0.5);
        let mut total = 0.0;
        for (&x, g) in data.iter().zip(guesses.iter_mut()) {
            if !self.support.contains(x) {
                return f64::NEG_INFINITY;
            }
            let u = self.cdf_from(x, *g);
            *g = u;
            total += self.log_density_at(u);
        }
        total
    }

    pub fn moment_exists(&self, k: u32) -> bool {
        moment_exists(&self.params, k)
    }

    /// `E[X^k]`.
    pub fn raw_moment(&self, k: u32) -> Result<f64> {
        moments::raw_moment(&self.params, k)
    }

    /// `E[X]` from its closed form.
    pub fn mean(&self) -> Result<f64> {
        moments::mean(&self.params)
    }

    /// Inverse-transform sampling.
    pub fn sample<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Vec<f64> {
        (0..n)
            .map(|_| {
                let mut u: f64 = rng.random();
                while u == 0.0 {
                    u = rng.random();
                }
                self.quantile_unchecked(u)
            })
            .collect()
    }

    /// Applies `Q` to a stream of uniforms.
    pub fn sample_from_uniforms<I>(&self, uniforms: I) -> Result<Vec<f64>>
    where
        I: IntoIterator<Item = f64>,
    {
        uniforms.into_iter().map(|u| self.quantile(u)).collect()
    }
}

/// `Q(u)` for raw parameters.
pub fn quantile(params: &GldParams, u: f64) -> Result<f64> {
    Gld::new(*params)?.quantile(u)
}

pub fn pdf(params: &GldParams, x: f64) -> Result<f64> {
    Ok(Gld::new(*params)?.pdf(x))
}

pub fn cdf(params: &GldParams, x: f64) -> Result<f64> {
    Ok(Gld::new(*params)?.cdf(x))
}

pub fn support(params: &GldParams) -> Result<Support> {
    Ok(Gld::new(*params)?.support())
}

pub fn raw_moment(params: &GldParams, k: u32) -> Result<f64> {
    moments::raw_moment(params, k)
}

pub fn mean(params: &GldParams) -> Result<f64> {
    moments::mean(params)
}

pub fn sample<R: Rng + ?Sized>(params: &GldParams, n: usize, rng: &mut R) -> Result<Vec<f64>> {
    Ok(Gld::new(*params)?.sample(n, rng))
}
