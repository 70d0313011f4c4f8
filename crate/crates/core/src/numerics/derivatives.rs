//! Central-difference derivatives and a damped Newton refinement.

use nalgebra::{DMatrix, DVector};

/// Central-difference gradient with per-coordinate steps.
pub fn gradient<F: FnMut(&[f64]) -> f64>(mut f: F, x: &[f64], steps: &[f64]) -> Vec<f64> {
    let mut probe = x.to_vec();
    (0..x.len())
        .map(|i| {
            let h = steps[i];
            probe[i] = x[i] + h;
            let up = f(&probe);
            probe[i] = x[i] - h;
            let down = f(&probe);
            probe[i] = x[i];
            (up - down) / (2.0 * h)
        })
        .collect()
}

/// Central-difference Hessian with per-coordinate steps.
pub fn hessian<F: FnMut(&[f64]) -> f64>(mut f: F, x: &[f64], steps: &[f64]) -> DMatrix<f64> {
    let d = x.len();
    let f0 = f(x);
    let mut probe = x.to_vec();
    let mut h = DMatrix::zeros(d, d);
    for i in 0..d {
        let hi = steps[i];
        probe[i] = x[i] + hi;
        let up = f(&probe);
        probe[i] = x[i] - hi;
        let down = f(&probe);
        probe[i] = x[i];
        h[(i, i)] = (up - 2.0 * f0 + down) / (hi * hi);
        for j in 0..i {
            let hj = steps[j];
            let mut corner = |si: f64, sj: f64| {
                probe[i] = x[i] + si * hi;
                probe[j] = x[j] + sj * hj;
                let v = f(&probe);
                probe[i] = x[i];
                probe[j] = x[j];
                v
            };
            let v = (corner(1.0, 1.0) - corner(1.0, -1.0) - corner(-1.0, 1.0) + corner(-1.0, -1.0))
                / (4.0 * hi * hj);
            h[(i, j)] = v;
            h[(j, i)] = v;
        }
    }
    h
}

/// Newton steps on a smooth objective from a point near its minimum,
/// halving any step that does not decrease `f`. Stops when the Hessian is
/// not positive definite or no step helps. Returns the refined point and value.
pub fn newton_polish<F: FnMut(&[f64]) -> f64>(
    mut f: F,
    x0: &[f64],
    steps: &[f64],
    max_iter: usize,
) -> (Vec<f64>, f64) {
    let mut x = x0.to_vec();
    let mut fx = f(&x);
    if !fx.is_finite() {
        return (x, fx);
    }
    for _ in 0..max_iter {
        let g = DVector::from_vec(gradient(&mut f, &x, steps));
        let h = hessian(&mut f, &x, steps);
        if g.iter().chain(h.iter()).any(|v| !v.is_finite()) {
            break;
        }
        let Some(chol) = h.cholesky() else { break };
        let delta = chol.solve(&g);
        let mut scale = 1.0;
        let mut accepted = false;
        for _ in 0..30 {
            let trial: Vec<f64> = x.iter().zip(delta.iter()).map(|(a, d)| a - scale * d).collect();
            let ft = f(&trial);
            if ft < fx {
                let gain = fx - ft;
                x = trial;
                fx = ft;
                accepted = gain > 1e-14 * fx.abs().max(1.0);
                break;
            }
            scale *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    (x, fx)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_derivatives_are_exact() {
        let f = |x: &[f64]| 3.0 * x[0] * x[0] + x[0] * x[1] + 2.0 * x[1] * x[1] - x[1];
        let g = gradient(f, &[1.0, 2.0], &[1e-3, 1e-3]);
        assert!((g[0] - 8.0).abs() < 1e-8 && (g[1] - 8.0).abs() < 1e-8);
        let h = hessian(f, &[1.0, 2.0], &[1e-3, 1e-3]);
        assert!((h[(0, 0)] - 6.0).abs() < 1e-6);
        assert!((h[(0, 1)] - 1.0).abs() < 1e-6);
        assert!((h[(1, 1)] - 4.0).abs() < 1e-6);
    }

    #[test]
    fn polish_reaches_minimum() {
        let f = |x: &[f64]| (x[0] - 1.0).powi(4) + (x[0] - 1.0).powi(2) + (x[1] + 2.0).powi(2);
        let (x, v) = newton_polish(f, &[1.3, -1.5], &[1e-4, 1e-4], 50);
        assert!((x[0] - 1.0).abs() < 1e-6 && (x[1] + 2.0).abs() < 1e-6, "{x:?}");
        assert!(v < 1e-12);
    }
}
