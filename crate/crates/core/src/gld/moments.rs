use statrs::function::gamma::ln_gamma;

use super::{Gld, GldParams, Parametrization};
use crate::error::{Error, Result};
use crate::numerics::quadrature::tanh_sinh_unit;

/// Below this shape magnitude the FKML moment sums lose too many digits to
/// cancellation (terms grow like `lambda^-k`), so moments come from
/// quadrature of the quantile function instead.
const FKML_SERIES_MIN_SHAPE: f64 = 0.02;
const QUADRATURE_REL_TOL: f64 = 1e-13;

fn beta(a: f64, b: f64) -> f64 {
    (ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b)).exp()
}

fn binomial(n: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// The k-th moment exists iff `min(lambda3, lambda4) > -1/k`.
pub fn moment_exists(params: &GldParams, k: u32) -> bool {
    k >= 1 && params.lambda3.min(params.lambda4) > -1.0 / k as f64
}

fn require(params: &GldParams, k: u32) -> Result<()> {
    if k == 0 {
        return Err(Error::InvalidArgument("moment order must be positive".into()));
    }
    if !moment_exists(params, k) {
        return Err(Error::MomentDoesNotExist {
            k,
            lambda3: params.lambda3,
            lambda4: params.lambda4,
        });
    }
    Ok(())
}

pub(super) fn mean(params: &GldParams) -> Result<f64> {
    require(params, 1)?;
    let shift = 1.0 / (params.lambda3 + 1.0) - 1.0 / (params.lambda4 + 1.0);
    Ok(match params.parametrization {
        Parametrization::Rs => params.lambda1 + shift / params.lambda2,
        Parametrization::Fkml => params.lambda1 - shift / params.lambda2,
    })
}

/// `E[Y^k]` for the RS variate with `lambda1 = 0`.
fn rs_centered_raw(l2: f64, l3: f64, l4: f64, k: u32) -> f64 {
    let sum: f64 = (0..=k)
        .map(|i| {
            let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
            sign * binomial(k, i) * beta(l3 * (k - i) as f64 + 1.0, l4 * i as f64 + 1.0)
        })
        .sum();
    sum / l2.powi(k as i32)
}

/// `s_k = E[((X - b) / a)^k]` for FKML, with `(X - b)/a = U^l3/l3 - (1-U)^l4/l4`.
fn fkml_s(l3: f64, l4: f64, k: u32) -> f64 {
    (0..=k)
        .map(|i| {
            let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
            sign * binomial(k, i)
                * l3.powi(-((k - i) as i32))
                * l4.powi(-(i as i32))
                * beta(l3 * (k - i) as f64 + 1.0, l4 * i as f64 + 1.0)
        })
        .sum()
}

fn use_fkml_series(l3: f64, l4: f64) -> bool {
    l3.abs().min(l4.abs()) >= FKML_SERIES_MIN_SHAPE
}

pub(super) fn raw_moment(params: &GldParams, k: u32) -> Result<f64> {
    require(params, k)?;
    let GldParams {
        lambda1: l1,
        lambda2: l2,
        lambda3: l3,
        lambda4: l4,
        parametrization,
    } = *params;
    match parametrization {
        Parametrization::Rs => {
            if l1 == 0.0 {
                return Ok(rs_centered_raw(l2, l3, l4, k));
            }
            Ok((0..=k)
                .map(|j| {
                    let m = if j == 0 { 1.0 } else { rs_centered_raw(l2, l3, l4, j) };
                    binomial(k, j) * l1.powi((k - j) as i32) * m
                })
                .sum())
        }
        Parametrization::Fkml => {
            if use_fkml_series(l3, l4) {
                let a = 1.0 / l2;
                let b = l1 - 1.0 / (l2 * l3) + 1.0 / (l2 * l4);
                Ok((0..=k)
                    .map(|j| {
                        let s = if j == 0 { 1.0 } else { fkml_s(l3, l4, j) };
                        binomial(k, j) * b.powi((k - j) as i32) * a.powi(j as i32) * s
                    })
                    .sum())
            } else {
                if !(l2 > 0.0) {
                    return Err(Error::InvalidParams("FKML requires lambda2 > 0".into()));
                }
                let gld = Gld::new_unchecked(*params);
                let [m] = tanh_sinh_unit(
                    |u, v| [gld.quantile_split(u, v).powi(k as i32)],
                    QUADRATURE_REL_TOL,
                );
                Ok(m)
            }
        }
    }
}

/// Central moments `(c2, c3, c4)` of the unit-scale FKML variate
/// `(U^l3 - 1)/l3 - ((1-U)^l4 - 1)/l4`. `None` unless the fourth moment exists.
pub fn fkml_central_moments(lambda3: f64, lambda4: f64) -> Option<[f64; 3]> {
    if !(lambda3.min(lambda4) > -0.25) || !lambda3.is_finite() || !lambda4.is_finite() {
        return None;
    }
    if use_fkml_series(lambda3, lambda4) {
        let s1 = fkml_s(lambda3, lambda4, 1);
        let s2 = fkml_s(lambda3, lambda4, 2);
        let s3 = fkml_s(lambda3, lambda4, 3);
        let s4 = fkml_s(lambda3, lambda4, 4);
        let c2 = s2 - s1 * s1;
        let c3 = s3 - 3.0 * s1 * s2 + 2.0 * s1.powi(3);
        let c4 = s4 - 4.0 * s1 * s3 + 6.0 * s1 * s1 * s2 - 3.0 * s1.powi(4);
        Some([c2, c3, c4])
    } else {
        let unit = Gld::new_unchecked(GldParams::fkml(0.0, 1.0, lambda3, lambda4));
        let m = 1.0 / (lambda4 + 1.0) - 1.0 / (lambda3 + 1.0);
        let [c2, c3, c4] = tanh_sinh_unit(
            |u, v| {
                let d = unit.quantile_split(u, v) - m;
                let d2 = d * d;
                [d2, d2 * d, d2 * d2]
            },
            QUADRATURE_REL_TOL,
        );
        Some([c2, c3, c4])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn existence() {
        let p = |l3, l4| GldParams::rs(0.0, 1.0, l3, l4);
        assert!(moment_exists(&p(0.5, 0.5), 4));
        assert!(!moment_exists(&p(-0.3, 0.5), 4));
        assert!(moment_exists(&p(-0.3, 0.5), 2));
        assert!(matches!(
            raw_moment(&p(-0.3, 0.5), 4),
            Err(Error::MomentDoesNotExist { k: 4, .. })
        ));
    }

    #[test]
    fn uniform_moments() {
        let p = GldParams::rs(0.0, 1.0, 1.0, 1.0);
        assert_abs_diff_eq!(raw_moment(&p, 2).unwrap(), 1.0 / 3.0, epsilon = 1e-14);
        assert_abs_diff_eq!(raw_moment(&p, 1).unwrap(), 0.0, epsilon = 1e-14);
        let shifted = GldParams::rs(2.0, 1.0, 1.0, 1.0);
        assert_abs_diff_eq!(raw_moment(&shifted, 2).unwrap(), 4.0 + 1.0 / 3.0, epsilon = 1e-13);
    }

    #[test]
    fn symmetric_fkml_mean_is_zero() {
        let p = GldParams::fkml(0.0, 2.0, 0.13, 0.13);
        assert_abs_diff_eq!(raw_moment(&p, 1).unwrap(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn mean_examples() {
        assert_abs_diff_eq!(mean(&GldParams::rs(5.0, 2.0, 0.3, 0.3)).unwrap(), 5.0, epsilon = 1e-15);
        assert!(mean(&GldParams::rs(-1.43, 0.11, 0.0023, 0.19)).unwrap().abs() < 5e-3);
        assert_abs_diff_eq!(mean(&GldParams::fkml(7.0, 2.0, 0.13, 0.13)).unwrap(), 7.0, epsilon = 1e-15);
    }

    #[test]
    fn series_and_quadrature_paths_agree_near_switch() {
        // Just above and below the switch the two routes describe the same
        // distribution up to a tiny shape change.
        let above = fkml_central_moments(0.0201, 0.3).unwrap();
        let below = fkml_central_moments(0.0199, 0.3).unwrap();
        for (a, b) in above.iter().zip(&below) {
            assert!((a - b).abs() / a.abs() < 2e-3, "{a} vs {b}");
        }
        // Logistic limit: variance pi^2/3, zero skew, c4 = 7 pi^4 / 15.
        let [c2, c3, c4] = fkml_central_moments(0.0, 0.0).unwrap();
        let pi2 = std::f64::consts::PI.powi(2);
        assert_abs_diff_eq!(c2, pi2 / 3.0, epsilon = 1e-10);
        assert_abs_diff_eq!(c3, 0.0, epsilon = 1e-10);
        assert_abs_diff_eq!(c4, 7.0 * pi2 * pi2 / 15.0, epsilon = 1e-8);
    }
}
