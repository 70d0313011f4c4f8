//! Parameter estimation for a plain GλD sample.
//!
//! The maximum-likelihood fit follows a candidate-search scheme: a scrambled
//! quasi-random set of `(lambda3, lambda4)` pairs is completed into full
//! parameter vectors by an initializer (percentile matching for RS, moment
//! matching for FKML), inadmissible vectors are discarded, the vector that
//! best matches the sample statistics seeds a simplex maximization of the
//! likelihood.

mod candidates;
mod moments;
mod nmle;
mod percentile;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gld::GldParams;
use crate::numerics::nelder_mead::SimplexOptions;

pub use candidates::{quasi_random_candidates, CandidateTable};
pub use moments::{fkml_mom_fit, fkml_theoretical_shape, sample_moments, MomFit, MomentStats};
pub use nmle::{gld_log_likelihood, nmle_fit, nmle_fit_from, nmle_fit_with, MIN_FIT_SIZE};
pub use percentile::{
    percentile_stats, rs_percentile_fit, rs_theoretical_shape, sample_percentile, PercentileFit,
    PercentileStats, DEFAULT_PERCENTILE_V,
};

/// Settings shared by the candidate search and the simplex optimizer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimizerConfig {
    /// Number of quasi-random `(lambda3, lambda4)` candidates.
    pub n_candidates: usize,
    /// The candidates fill `[lower, upper]^2`.
    pub candidate_lower: f64,
    pub candidate_upper: f64,
    /// Absolute spread of objective values that ends a simplex run.
    pub simplex_tolerance: f64,
    pub max_iterations: usize,
    /// Fresh-simplex restarts from the best point after the first run.
    pub restarts: usize,
    /// Seed of the candidate scrambling.
    pub seed: u64,
    /// Tail probability `v` of the percentile statistics.
    pub percentile_v: f64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            n_candidates: 10_000,
            candidate_lower: -1.5,
            candidate_upper: 1.5,
            simplex_tolerance: 1e-8,
            max_iterations: 2000,
            restarts: 3,
            seed: 0x5EED_61D,
            percentile_v: DEFAULT_PERCENTILE_V,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.candidate_lower < self.candidate_upper)
            || !self.candidate_lower.is_finite()
            || !self.candidate_upper.is_finite()
        {
            return Err(Error::InvalidArgument("candidate square is degenerate".into()));
        }
        if !(self.simplex_tolerance > 0.0) || self.max_iterations == 0 {
            return Err(Error::InvalidArgument(
                "simplex tolerance and iteration cap must be positive".into(),
            ));
        }
        if !(self.percentile_v > 0.0 && self.percentile_v < 0.25) {
            return Err(Error::InvalidArgument(format!(
                "percentile v = {} outside (0, 0.25)",
                self.percentile_v
            )));
        }
        Ok(())
    }

    pub(crate) fn simplex(&self) -> SimplexOptions {
        SimplexOptions {
            tolerance: self.simplex_tolerance,
            max_iterations: self.max_iterations,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Initializer {
    Percentile,
    Moments,
    User,
}

/// Outcome of a maximum-likelihood fit.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitResult {
    pub params: GldParams,
    pub loglik: f64,
    pub converged: bool,
    pub iterations: usize,
    pub initializer: Initializer,
    pub init_params: GldParams,
    pub init_loglik: f64,
}
