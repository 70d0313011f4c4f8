//! Validity of RS parameter vectors.
//!
//! An RS vector is a distribution iff
//! `(l3 u^(l3-1) + l4 (1-u)^(l4-1)) / l2 >= 0` on `[0, 1]`. When both shape
//! parameters share a sign the answer follows from the sign of `l2` alone.
//! Mixed signs are decided on a 4097-point grid whose endpoints sit `1e-9`
//! inside the interval; any negative grid value rejects the vector, which
//! also rejects borderline vectors with a minimum in `[-1e-12, 0)`.

use super::{GldParams, Parametrization};

pub const VALIDITY_GRID_POINTS: usize = 4097;
pub const VALIDITY_ENDPOINT_OFFSET: f64 = 1e-9;

fn derivative_numerator(l3: f64, l4: f64, u: f64) -> f64 {
    let left = if l3 == 0.0 { 0.0 } else { l3 * u.powf(l3 - 1.0) };
    let right = if l4 == 0.0 {
        0.0
    } else {
        l4 * (1.0 - u).powf(l4 - 1.0)
    };
    left + right
}

/// Whether an RS parameter vector defines a distribution. Always `false`
/// for FKML input.
pub fn rs_is_valid(params: &GldParams) -> bool {
    if params.parametrization != Parametrization::Rs {
        return false;
    }
    let GldParams {
        lambda1,
        lambda2,
        lambda3,
        lambda4,
        ..
    } = *params;
    if ![lambda1, lambda2, lambda3, lambda4].iter().all(|v| v.is_finite()) || lambda2 == 0.0 {
        return false;
    }
    // Both shapes zero gives a point mass.
    if lambda3 == 0.0 && lambda4 == 0.0 {
        return false;
    }
    if lambda3 >= 0.0 && lambda4 >= 0.0 {
        return lambda2 > 0.0;
    }
    if lambda3 <= 0.0 && lambda4 <= 0.0 {
        return lambda2 < 0.0;
    }

    let n = VALIDITY_GRID_POINTS;
    let at = |i: usize| -> f64 {
        if i == 0 {
            VALIDITY_ENDPOINT_OFFSET
        } else if i == n - 1 {
            1.0 - VALIDITY_ENDPOINT_OFFSET
        } else {
            i as f64 / (n - 1) as f64
        }
    };
    let ok = |u: f64| {
        let v = derivative_numerator(lambda3, lambda4, u) / lambda2;
        v >= 0.0
    };
    // Mixed-sign vectors usually fail near an endpoint, so check those first.
    if !ok(at(0)) || !ok(at(n - 1)) {
        return false;
    }
    (1..n - 1).all(|i| ok(at(i)))
}
