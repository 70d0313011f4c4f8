//! Monte Carlo study of the hurdle regression estimator.
//!
//! Each replicate draws `n` rows of
//!
//! ```text
//! y  = (1 - V) (6.13 - 0.021 x1 - 0.35 x2 + e)
//! logit P(V = 1) = 1.6 - 0.13 x1 + 0.21 x2
//! x1 ~ RS(3.87, 0.10, 0.024, 0.19),  x2 ~ Bernoulli(0.6)
//! ```
//!
//! with `e` from one of four zero-mean GλD error laws, then fits the hurdle
//! regression. Replicate `r` uses ChaCha8 stream `r` of the study seed, so
//! results do not depend on scheduling.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fitting::OptimizerConfig;
use crate::gld::{Gld, GldParams, Parametrization};
use crate::numerics::{sorted_copy, type8_sorted};
use crate::regression::{hurdle_regression_fit, lambda1_star, DesignMatrix};

pub const NONZERO_BETA: [f64; 3] = [6.13, -0.021, -0.35];
pub const ZERO_GAMMA: [f64; 3] = [1.6, -0.13, 0.21];
pub const X2_PROBABILITY: f64 = 0.6;
pub const COEFFICIENT_NAMES: [&str; 3] = ["intercept", "x1", "x2"];

pub fn x1_params() -> GldParams {
    GldParams::rs(3.87, 0.10, 0.024, 0.19)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Scenario {
    #[serde(rename = "HRS-symmetric")]
    HrsSymmetric,
    #[serde(rename = "HFKML-symmetric")]
    HfkmlSymmetric,
    #[serde(rename = "HRS-skewed")]
    HrsSkewed,
    #[serde(rename = "HFKML-skewed")]
    HfkmlSkewed,
}

impl Scenario {
    pub const ALL: [Scenario; 4] = [
        Scenario::HrsSymmetric,
        Scenario::HfkmlSymmetric,
        Scenario::HrsSkewed,
        Scenario::HfkmlSkewed,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scenario::HrsSymmetric => "HRS-symmetric",
            Scenario::HfkmlSymmetric => "HFKML-symmetric",
            Scenario::HrsSkewed => "HRS-skewed",
            Scenario::HfkmlSkewed => "HFKML-skewed",
        }
    }

    pub fn parametrization(self) -> Parametrization {
        match self {
            Scenario::HrsSymmetric | Scenario::HrsSkewed => Parametrization::Rs,
            Scenario::HfkmlSymmetric | Scenario::HfkmlSkewed => Parametrization::Fkml,
        }
    }

    /// Zero-mean error law; skewed laws get their exact `lambda1*`.
    pub fn error_params(self) -> GldParams {
        let (l2, l3, l4) = match self {
            Scenario::HrsSymmetric | Scenario::HfkmlSymmetric => (2.0, 0.13, 0.13),
            Scenario::HrsSkewed => (0.11, 0.0023, 0.19),
            Scenario::HfkmlSkewed => (1.07, 0.84, 0.02),
        };
        let par = self.parametrization();
        let l1 = lambda1_star(l2, l3, l4, par).expect("error laws have a mean");
        GldParams::new(par, l1, l2, l3, l4)
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Scenario::ALL
            .into_iter()
            .find(|sc| sc.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidArgument(format!("unknown scenario '{s}'")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulatedData {
    pub y: Vec<f64>,
    pub x1: Vec<f64>,
    pub x2: Vec<f64>,
}

fn open_uniform<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    loop {
        let u: f64 = rng.random();
        if u > 0.0 {
            return u;
        }
    }
}

/// One data set of size `n`. Four uniforms are consumed per row whether or
/// not the row is zero.
pub fn simulate_model<R: Rng + ?Sized>(scenario: Scenario, n: usize, rng: &mut R) -> SimulatedData {
    let x1_law = Gld::new(x1_params()).expect("valid covariate law");
    let error_law = Gld::new(scenario.error_params()).expect("valid error law");
    let mut out = SimulatedData {
        y: Vec::with_capacity(n),
        x1: Vec::with_capacity(n),
        x2: Vec::with_capacity(n),
    };
    for _ in 0..n {
        let x1 = x1_law.quantile(open_uniform(rng)).expect("open unit interval");
        let x2 = if rng.random::<f64>() < X2_PROBABILITY { 1.0 } else { 0.0 };
        let eta = ZERO_GAMMA[0] + ZERO_GAMMA[1] * x1 + ZERO_GAMMA[2] * x2;
        let zero = rng.random::<f64>() < 1.0 / (1.0 + (-eta).exp());
        let e = error_law.quantile(open_uniform(rng)).expect("open unit interval");
        let y = if zero {
            0.0
        } else {
            NONZERO_BETA[0] + NONZERO_BETA[1] * x1 + NONZERO_BETA[2] * x2 + e
        };
        out.y.push(y);
        out.x1.push(x1);
        out.x2.push(x2);
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReplicateEstimate {
    pub nonzero: Vec<f64>,
    pub zero: Vec<f64>,
}

/// Generates and fits replicate `index`.
pub fn run_replicate(
    scenario: Scenario,
    n: usize,
    seed: u64,
    index: usize,
    config: &OptimizerConfig,
) -> Result<ReplicateEstimate> {
    let mut rng = crate::regression::replicate_rng(seed, index);
    let data = simulate_model(scenario, n, &mut rng);
    let design = DesignMatrix::with_intercept(&[&data.x1, &data.x2], n)?;
    let fit = hurdle_regression_fit(
        &design,
        &design,
        &data.y,
        scenario.parametrization(),
        config,
        None,
    )?;
    let zero = fit.zero_part?;
    Ok(ReplicateEstimate {
        nonzero: fit.nonzero_part.beta,
        zero: zero.gamma,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StudyConfig {
    pub scenario: Scenario,
    pub n: usize,
    pub replicates: usize,
    pub seed: u64,
    pub optimizer: OptimizerConfig,
    pub max_failure_rate: f64,
}

/// Mean, standard error (standard deviation over replicates) and type-8
/// 2.5% / 97.5% percentiles of one coefficient.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoefficientSummary {
    pub part: &'static str,
    pub name: &'static str,
    pub target: f64,
    pub mean: f64,
    /// `None` with a single replicate.
    pub se: Option<f64>,
    pub p025: f64,
    pub p975: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StudySummary {
    pub scenario: Scenario,
    pub n: usize,
    pub replicates: usize,
    pub failed: usize,
    pub coefficients: Vec<CoefficientSummary>,
}

impl StudySummary {
    pub fn coefficient(&self, part: &str, name: &str) -> Option<&CoefficientSummary> {
        self.coefficients
            .iter()
            .find(|c| c.part == part && c.name == name)
    }
}

fn summarize(part: &'static str, name: &'static str, target: f64, values: &[f64]) -> CoefficientSummary {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let se = (values.len() > 1).then(|| {
        (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    });
    let sorted = sorted_copy(values);
    CoefficientSummary {
        part,
        name,
        target,
        mean,
        se,
        p025: type8_sorted(&sorted, 0.025),
        p975: type8_sorted(&sorted, 0.975),
    }
}

/// Runs all replicates and summarizes them in replicate order.
pub fn run_study(config: &StudyConfig) -> Result<StudySummary> {
    if config.replicates == 0 || config.n == 0 {
        return Err(Error::InvalidArgument("replicates and n must be positive".into()));
    }
    config.optimizer.validate()?;
    let results: Vec<Result<ReplicateEstimate>> = (0..config.replicates)
        .into_par_iter()
        .map(|r| run_replicate(config.scenario, config.n, config.seed, r, &config.optimizer))
        .collect();
    let kept: Vec<&ReplicateEstimate> = results.iter().filter_map(|r| r.as_ref().ok()).collect();
    let failed = config.replicates - kept.len();
    if kept.is_empty() || failed as f64 > config.max_failure_rate * config.replicates as f64 {
        return Err(Error::TooManyReplicateFailures {
            failed,
            total: config.replicates,
        });
    }
    let mut coefficients = Vec::new();
    for (j, name) in COEFFICIENT_NAMES.iter().enumerate() {
        let v: Vec<f64> = kept.iter().map(|e| e.nonzero[j]).collect();
        coefficients.push(summarize("nonzero", name, NONZERO_BETA[j], &v));
    }
    for (j, name) in COEFFICIENT_NAMES.iter().enumerate() {
        let v: Vec<f64> = kept.iter().map(|e| e.zero[j]).collect();
        coefficients.push(summarize("zero", name, ZERO_GAMMA[j], &v));
    }
    Ok(StudySummary {
        scenario: config.scenario,
        n: config.n,
        replicates: config.replicates,
        failed,
        coefficients,
    })
}
