use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::gld_fit::{gld_regression_fit_with, RegressionFit};
use super::DesignMatrix;
use crate::error::{Error, Result};
use crate::fitting::{CandidateTable, OptimizerConfig};
use crate::gld::Gld;
use crate::numerics::{sorted_copy, type8_sorted};

/// Settings of the simulated coefficient intervals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CiOptions {
    pub n_reps: usize,
    pub alpha: f64,
    /// Replicate `r` draws from the ChaCha8 stream `r` of this seed.
    pub seed: u64,
    /// Above this fraction of failed refits the intervals are not reported.
    pub max_failure_rate: f64,
}

impl Default for CiOptions {
    fn default() -> Self {
        Self {
            n_reps: 1000,
            alpha: 0.05,
            seed: 0,
            max_failure_rate: 0.2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoefficientInterval {
    pub estimate: f64,
    pub lower: f64,
    pub upper: f64,
    /// Simulated coefficients, shifted so their mean is `estimate`.
    pub samples: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoefficientCi {
    pub intervals: Vec<CoefficientInterval>,
    pub alpha: f64,
    pub n_reps: usize,
    pub failed: usize,
}

/// Replicate RNG: stream `index` of the ChaCha8 generator keyed by `seed`.
pub fn replicate_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

/// Intervals for the coefficients by refitting on `W beta + e` with `e` drawn
/// from the fitted error distribution.
pub fn simulate_coefficient_cis(
    fit: &RegressionFit,
    w: &DesignMatrix,
    config: &OptimizerConfig,
    options: &CiOptions,
) -> Result<CoefficientCi> {
    if !fit.converged {
        return Err(Error::NonConvergence(
            "intervals need a converged point estimate".into(),
        ));
    }
    if options.n_reps == 0 {
        return Err(Error::InvalidArgument("n_reps must be positive".into()));
    }
    if !(options.alpha > 0.0 && options.alpha < 1.0) {
        return Err(Error::InvalidArgument(format!("alpha = {}", options.alpha)));
    }
    config.validate()?;
    let table = CandidateTable::shared(fit.parametrization, config);
    let error = Gld::new(fit.error_params())?;
    let mean = w.predict(&fit.beta);
    let n = w.nrows();

    let results: Vec<Option<Vec<f64>>> = (0..options.n_reps)
        .into_par_iter()
        .map(|r| {
            let mut rng = replicate_rng(options.seed, r);
            let eps = error.sample(n, &mut rng);
            let y: Vec<f64> = mean.iter().zip(&eps).map(|(m, e)| m + e).collect();
            gld_regression_fit_with(w, &y, &table, config).ok().map(|f| f.beta)
        })
        .collect();
    let kept: Vec<&Vec<f64>> = results.iter().flatten().collect();
    let failed = options.n_reps - kept.len();
    if failed as f64 > options.max_failure_rate * options.n_reps as f64 || kept.is_empty() {
        return Err(Error::TooManyReplicateFailures {
            failed,
            total: options.n_reps,
        });
    }

    let intervals = (0..fit.beta.len())
        .map(|j| {
            let raw: Vec<f64> = kept.iter().map(|b| b[j]).collect();
            let m = raw.iter().sum::<f64>() / raw.len() as f64;
            let samples: Vec<f64> = raw.iter().map(|v| v - m + fit.beta[j]).collect();
            let sorted = sorted_copy(&samples);
            CoefficientInterval {
                estimate: fit.beta[j],
                lower: type8_sorted(&sorted, options.alpha / 2.0),
                upper: type8_sorted(&sorted, 1.0 - options.alpha / 2.0),
                samples,
            }
        })
        .collect();
    Ok(CoefficientCi {
        intervals,
        alpha: options.alpha,
        n_reps: options.n_reps,
        failed,
    })
}
