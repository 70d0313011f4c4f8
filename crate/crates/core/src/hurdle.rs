//! Hurdle GλD: a point mass `lambda0` at zero mixed with a GλD for the
//! non-zero values. The two parts are estimated from disjoint data.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fitting::{nmle_fit, FitResult, OptimizerConfig};
use crate::gld::{Gld, GldParams, Parametrization};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HurdleGldParams {
    pub lambda0: f64,
    pub continuous: GldParams,
}

impl HurdleGldParams {
    fn check(&self) -> Result<Gld> {
        if !(0.0..=1.0).contains(&self.lambda0) {
            return Err(Error::ProbabilityOutOfRange(self.lambda0));
        }
        Gld::new(self.continuous)
    }
}

/// Exact zeros counted, non-zeros kept in their original order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HurdleSplit {
    pub zero_count: usize,
    pub nonzero_values: Vec<f64>,
}

pub fn split(data: &[f64]) -> HurdleSplit {
    let nonzero_values: Vec<f64> = data.iter().copied().filter(|&y| y != 0.0).collect();
    HurdleSplit {
        zero_count: data.len() - nonzero_values.len(),
        nonzero_values,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HurdleFit {
    /// Proportion of zeros.
    pub lambda0: f64,
    pub zero_count: usize,
    pub n: usize,
    /// Fails when there are too few non-zero values.
    pub continuous: Result<FitResult>,
}

impl HurdleFit {
    pub fn params(&self) -> Option<HurdleGldParams> {
        self.continuous.as_ref().ok().map(|f| HurdleGldParams {
            lambda0: self.lambda0,
            continuous: f.params,
        })
    }
}

pub fn fit_hurdle(
    data: &[f64],
    parametrization: Parametrization,
    config: &OptimizerConfig,
) -> Result<HurdleFit> {
    if data.is_empty() {
        return Err(Error::InsufficientData("empty sample".into()));
    }
    let s = split(data);
    Ok(HurdleFit {
        lambda0: s.zero_count as f64 / data.len() as f64,
        zero_count: s.zero_count,
        n: data.len(),
        continuous: nmle_fit(&s.nonzero_values, parametrization, config),
    })
}

/// `count * ln(p)` with the convention `0 * ln 0 = 0`.
fn xlogy(count: usize, p: f64) -> f64 {
    if count == 0 {
        0.0
    } else {
        count as f64 * p.ln()
    }
}

/// Log-likelihood of the mixture; `-inf` when the data contradict a
/// degenerate `lambda0`.
pub fn hurdle_loglik(params: &HurdleGldParams, data: &[f64]) -> Result<f64> {
    let gld = params.check()?;
    let s = split(data);
    let zero_part = xlogy(s.zero_count, params.lambda0)
        + xlogy(s.nonzero_values.len(), 1.0 - params.lambda0);
    if zero_part == f64::NEG_INFINITY {
        return Ok(f64::NEG_INFINITY);
    }
    Ok(zero_part + gld.log_likelihood(&s.nonzero_values))
}

/// `lambda0 * 1{y >= 0} + (1 - lambda0) F(y)`.
pub fn hurdle_cdf(params: &HurdleGldParams, y: f64) -> Result<f64> {
    let gld = params.check()?;
    let atom = if y >= 0.0 { params.lambda0 } else { 0.0 };
    Ok(atom + (1.0 - params.lambda0) * gld.cdf(y))
}

/// Draws zero with probability `lambda0`, otherwise from the GλD.
pub fn hurdle_sample<R: Rng + ?Sized>(
    params: &HurdleGldParams,
    n: usize,
    rng: &mut R,
) -> Result<Vec<f64>> {
    let gld = params.check()?;
    if params.lambda0 == 0.0 {
        return Ok(gld.sample(n, rng));
    }
    if params.lambda0 == 1.0 {
        return Ok(vec![0.0; n]);
    }
    Ok((0..n)
        .map(|_| {
            if rng.random::<f64>() < params.lambda0 {
                0.0
            } else {
                gld.sample(1, rng)[0]
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn uniform(lambda0: f64) -> HurdleGldParams {
        HurdleGldParams {
            lambda0,
            continuous: GldParams::rs(0.0, 1.0, 1.0, 1.0),
        }
    }

    #[test]
    fn split_examples() {
        assert_eq!(
            split(&[0.0, 0.0, 1.5]),
            HurdleSplit {
                zero_count: 2,
                nonzero_values: vec![1.5]
            }
        );
        assert_eq!(split(&[]).zero_count, 0);
        assert_eq!(split(&[3.0, 7.0]).nonzero_values, vec![3.0, 7.0]);
    }

    #[test]
    fn loglik_examples() {
        let half = 0.5f64.ln();
        // Any non-zero point of the uniform on [-1, 1] has density 1/2.
        let ll = hurdle_loglik(&uniform(0.5), &[0.0, 0.5]).unwrap();
        assert!((ll - 3.0 * half).abs() < 1e-12);
        assert!((hurdle_loglik(&uniform(0.5), &[0.0, 0.0]).unwrap() - 2.0 * half).abs() < 1e-15);
        assert_eq!(hurdle_loglik(&uniform(1.0), &[1.0]).unwrap(), f64::NEG_INFINITY);
        assert_eq!(hurdle_loglik(&uniform(0.0), &[0.0]).unwrap(), f64::NEG_INFINITY);
    }

    #[test]
    fn cdf_examples() {
        let p = HurdleGldParams {
            lambda0: 0.3,
            continuous: GldParams::rs(1.5, 2.0, 1.0, 1.0),
        };
        // Between the atom and the continuous support only the atom counts.
        assert_eq!(hurdle_cdf(&p, 0.5).unwrap(), 0.3);
        assert_eq!(hurdle_cdf(&p, -0.5).unwrap(), 0.0);
        assert_eq!(hurdle_cdf(&p, 0.0).unwrap(), 0.3);
        assert_eq!(hurdle_cdf(&p, 2.0).unwrap(), 1.0);
        assert_eq!(hurdle_cdf(&uniform(1.0), -0.5).unwrap(), 0.0);
        assert_eq!(hurdle_cdf(&uniform(1.0), 0.0).unwrap(), 1.0);
    }

    #[test]
    fn all_zero_data() {
        let f = fit_hurdle(&[0.0; 20], Parametrization::Rs, &OptimizerConfig::default()).unwrap();
        assert_eq!(f.lambda0, 1.0);
        assert!(f.continuous.is_err());
        assert!(f.params().is_none());
    }
}
