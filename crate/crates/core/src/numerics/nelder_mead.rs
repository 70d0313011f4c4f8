//! Derivative-free simplex minimization.
//!
//! Objective values that are NaN or `+inf` are treated as infeasible; the
//! simplex moves away from them without special handling by the caller.
//! Maximizing a log-likelihood is done by minimizing its negation, so a
//! likelihood of `-inf` outside the admissible region acts as a barrier.

use serde::{Deserialize, Serialize};

/// Stopping rule for [`minimize`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimplexOptions {
    /// Stop once the spread of objective values across the simplex falls
    /// below this absolute amount, or once the simplex has collapsed to
    /// rounding level.
    pub tolerance: f64,
    /// Hard cap on simplex iterations.
    pub max_iterations: usize,
}

impl Default for SimplexOptions {
    fn default() -> Self {
        Self {
            tolerance: 1e-8,
            max_iterations: 2000,
        }
    }
}

/// Best point found by the simplex search.
#[derive(Debug, Clone, PartialEq)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub evaluations: usize,
    pub converged: bool,
}

fn sanitize(v: f64) -> f64 {
    if v.is_nan() {
        f64::INFINITY
    } else {
        v
    }
}

/// Relative distance below which two vertices are the same point up to
/// rounding.
pub const COLLAPSE_TOLERANCE: f64 = 1e-13;

/// Every vertex within rounding of the best one. Happens at a cusp of the
/// objective (e.g. an observation on a support endpoint), where the values
/// never agree to the tolerance but the location cannot move.
fn collapsed(simplex: &[Vec<f64>], best: usize) -> bool {
    let b = &simplex[best];
    simplex.iter().all(|v| {
        v.iter()
            .zip(b)
            .all(|(x, y)| (x - y).abs() <= COLLAPSE_TOLERANCE * y.abs().max(1.0))
    })
}

/// Nelder–Mead with dimension-adaptive coefficients.
///
/// The initial simplex is `x0` plus one vertex per coordinate displaced by
/// `steps[i]`.
pub fn minimize<F>(mut f: F, x0: &[f64], steps: &[f64], options: &SimplexOptions) -> Minimum
where
    F: FnMut(&[f64]) -> f64,
{
    let dim = x0.len();
    assert_eq!(dim, steps.len(), "one step per coordinate");
    let mut evaluations = 0usize;
    let mut eval = |x: &[f64], evaluations: &mut usize| {
        *evaluations += 1;
        sanitize(f(x))
    };

    if dim == 0 {
        let value = eval(x0, &mut evaluations);
        return Minimum {
            x: Vec::new(),
            value,
            iterations: 0,
            evaluations,
            converged: true,
        };
    }

    let d = dim as f64;
    let reflect = 1.0;
    let expand = 1.0 + 2.0 / d;
    let contract = 0.75 - 1.0 / (2.0 * d);
    let shrink = 1.0 - 1.0 / d;

    let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(dim + 1);
    simplex.push(x0.to_vec());
    for i in 0..dim {
        let mut v = x0.to_vec();
        v[i] += steps[i];
        simplex.push(v);
    }
    let mut values: Vec<f64> = simplex.iter().map(|v| eval(v, &mut evaluations)).collect();

    let mut order: Vec<usize> = (0..=dim).collect();
    let mut iterations = 0usize;
    let mut converged = false;
    let mut centroid = vec![0.0; dim];
    let mut trial = vec![0.0; dim];
    let mut trial2 = vec![0.0; dim];

    loop {
        // Stable sort keeps earlier vertices first on ties.
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        let best = order[0];
        let worst = order[dim];
        let second_worst = order[dim - 1];

        let spread = values[worst] - values[best];
        if spread.is_finite() && (spread.abs() < options.tolerance || collapsed(&simplex, best)) {
            converged = true;
            break;
        }
        if iterations >= options.max_iterations {
            break;
        }
        iterations += 1;

        centroid.iter_mut().for_each(|c| *c = 0.0);
        for &idx in &order[..dim] {
            for (c, x) in centroid.iter_mut().zip(&simplex[idx]) {
                *c += x;
            }
        }
        centroid.iter_mut().for_each(|c| *c /= d);

        for j in 0..dim {
            trial[j] = centroid[j] + reflect * (centroid[j] - simplex[worst][j]);
        }
        let f_reflect = eval(&trial, &mut evaluations);

        if f_reflect < values[best] {
            for j in 0..dim {
                trial2[j] = centroid[j] + expand * (trial[j] - centroid[j]);
            }
            let f_expand = eval(&trial2, &mut evaluations);
            if f_expand < f_reflect {
                simplex[worst].copy_from_slice(&trial2);
                values[worst] = f_expand;
            } else {
                simplex[worst].copy_from_slice(&trial);
                values[worst] = f_reflect;
            }
            continue;
        }
        if f_reflect < values[second_worst] {
            simplex[worst].copy_from_slice(&trial);
            values[worst] = f_reflect;
            continue;
        }

        let outside = f_reflect < values[worst];
        for j in 0..dim {
            trial2[j] = if outside {
                centroid[j] + contract * (trial[j] - centroid[j])
            } else {
                centroid[j] - contract * (centroid[j] - simplex[worst][j])
            };
        }
        let f_contract = eval(&trial2, &mut evaluations);
        let accept = if outside {
            f_contract <= f_reflect
        } else {
            f_contract < values[worst]
        };
        if accept {
            simplex[worst].copy_from_slice(&trial2);
            values[worst] = f_contract;
            continue;
        }

        let anchor = simplex[best].clone();
        for &idx in &order[1..] {
            for j in 0..dim {
                simplex[idx][j] = anchor[j] + shrink * (simplex[idx][j] - anchor[j]);
            }
            values[idx] = eval(&simplex[idx], &mut evaluations);
        }
    }

    let best = order[0];
    Minimum {
        x: simplex[best].clone(),
        value: values[best],
        iterations,
        evaluations,
        converged,
    }
}

/// Runs [`minimize`] and then restarts it `restarts` times from the current
/// best point with a fresh simplex, keeping the best result.
pub fn minimize_with_restarts<F>(
    mut f: F,
    x0: &[f64],
    steps: &[f64],
    options: &SimplexOptions,
    restarts: usize,
) -> Minimum
where
    F: FnMut(&[f64]) -> f64,
{
    let mut best = minimize(&mut f, x0, steps, options);
    for _ in 0..restarts {
        let previous = best.value;
        let next = minimize(&mut f, &best.x, steps, options);
        let improved = next.value < best.value;
        let iterations = best.iterations + next.iterations;
        let evaluations = best.evaluations + next.evaluations;
        if improved {
            best = next;
        } else {
            best.converged = best.converged || next.converged;
        }
        best.iterations = iterations;
        best.evaluations = evaluations;
        if !(previous - best.value > options.tolerance) {
            break;
        }
    }
    best
}
