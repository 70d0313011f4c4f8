use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use super::DesignMatrix;
use crate::error::{Error, Result};

const MAX_ITER: usize = 50;
const DEVIANCE_TOL: f64 = 1e-8;
/// Coefficients beyond this magnitude signal separation.
pub const SEPARATION_THRESHOLD: f64 = 1e4;
/// Fitted probabilities this close to 0 or 1 signal separation.
const BOUNDARY_PROB: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LogisticFit {
    pub gamma: Vec<f64>,
    pub std_errors: Vec<f64>,
    pub deviance: f64,
    pub converged: bool,
    pub iterations: usize,
}

fn softplus(x: f64) -> f64 {
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

fn deviance(eta: &DVector<f64>, v: &[bool]) -> f64 {
    2.0 * eta
        .iter()
        .zip(v)
        .map(|(&e, &vi)| if vi { softplus(-e) } else { softplus(e) })
        .sum::<f64>()
}

/// Logistic regression of `v` on `Z` by iteratively reweighted least squares.
pub fn logistic_fit(z: &DesignMatrix, v: &[bool]) -> Result<LogisticFit> {
    if v.len() != z.nrows() {
        return Err(Error::InvalidArgument("indicator length differs from design rows".into()));
    }
    let ones = v.iter().filter(|&&b| b).count();
    if ones == 0 || ones == v.len() {
        return Err(Error::DegenerateSample(
            "logistic fit needs both outcomes".into(),
        ));
    }
    z.check_rank()?;
    let m = z.values();
    let (n, p) = (m.nrows(), m.ncols());
    let target = DVector::from_iterator(n, v.iter().map(|&b| if b { 1.0 } else { 0.0 }));

    let mut gamma = DVector::zeros(p);
    let mut eta = m * &gamma;
    let mut dev = deviance(&eta, v);
    let newton_step = |gamma: &mut DVector<f64>, eta: &DVector<f64>| -> Result<()> {
        let mu = eta.map(sigmoid);
        let mut wz = m.clone();
        for (mut row, &u) in wz.row_iter_mut().zip(mu.iter()) {
            row *= (u * (1.0 - u)).max(f64::MIN_POSITIVE);
        }
        let information: DMatrix<f64> = m.transpose() * &wz;
        let score = m.transpose() * (&target - &mu);
        let chol = information.cholesky().ok_or(Error::Separation)?;
        *gamma += chol.solve(&score);
        if gamma.amax() > SEPARATION_THRESHOLD || gamma.iter().any(|g| !g.is_finite()) {
            return Err(Error::Separation);
        }
        Ok(())
    };
    let mut converged = false;
    let mut iterations = 0;
    while iterations < MAX_ITER {
        iterations += 1;
        newton_step(&mut gamma, &eta)?;
        eta = m * &gamma;
        let new_dev = deviance(&eta, v);
        let change = (new_dev - dev).abs();
        dev = new_dev;
        if change < DEVIANCE_TOL {
            converged = true;
            break;
        }
    }
    if converged {
        // The deviance settles well before the coefficients; one more step
        // brings the score to rounding level.
        newton_step(&mut gamma, &eta)?;
        eta = m * &gamma;
        dev = deviance(&eta, v);
    }
    let mu = eta.map(sigmoid);
    if mu.iter().any(|&u| u < BOUNDARY_PROB || u > 1.0 - BOUNDARY_PROB) {
        return Err(Error::Separation);
    }
    // Information at the final estimate.
    let mut wz = m.clone();
    for (mut row, &u) in wz.row_iter_mut().zip(mu.iter()) {
        row *= u * (1.0 - u);
    }
    let information: DMatrix<f64> = m.transpose() * &wz;
    let cov = information.try_inverse().ok_or(Error::Separation)?;
    let std_errors = (0..p).map(|j| cov[(j, j)].sqrt()).collect();
    Ok(LogisticFit {
        gamma: gamma.iter().copied().collect(),
        std_errors,
        deviance: dev,
        converged,
        iterations,
    })
}

/// Gradient of the logistic log-likelihood at `gamma`.
pub fn logistic_score(z: &DesignMatrix, v: &[bool], gamma: &[f64]) -> Vec<f64> {
    let m = z.values();
    let eta = m * DVector::from_column_slice(gamma);
    let resid = DVector::from_iterator(
        v.len(),
        v.iter().zip(eta.iter()).map(|(&b, &e)| if b { 1.0 } else { 0.0 } - sigmoid(e)),
    );
    (m.transpose() * resid).iter().copied().collect()
}
