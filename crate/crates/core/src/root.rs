//! Bracketing root finder.

use crate::error::{Error, Result};

pub const X_TOL: f64 = 1e-10;
pub const MAX_ITER: usize = 200;

/// Bisection for a sign change of `f` on `[lo, hi]`.
///
/// Stops once the bracket is narrower than `tol`, after `MAX_ITER` halvings,
/// or when the midpoint no longer separates the endpoints in floating point.
/// An exact zero at an endpoint is returned as is.
pub fn bisect<F: FnMut(f64) -> f64>(mut f: F, lo: f64, hi: f64, tol: f64) -> Result<f64> {
    if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
        return Err(Error::NumericalFailure(format!(
            "bad bracket [{lo}, {hi}]"
        )));
    }
    let (mut a, mut b) = (lo, hi);
    let fa = f(a);
    let fb = f(b);
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.is_nan() || fb.is_nan() || fa.signum() == fb.signum() {
        return Err(Error::NumericalFailure(format!(
            "no sign change on [{lo}, {hi}]: f = {fa}, {fb}"
        )));
    }
    let neg_at_a = fa < 0.0;
    for _ in 0..MAX_ITER {
        if b - a <= tol {
            break;
        }
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        let fm = f(m);
        if fm == 0.0 {
            return Ok(m);
        }
        if (fm < 0.0) == neg_at_a {
            a = m;
        } else {
            b = m;
        }
    }
    Ok(0.5 * (a + b))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_sqrt_two() {
        let x = bisect(|x| x * x - 2.0, 0.0, 2.0, 1e-14).unwrap();
        assert!((x - 2f64.sqrt()).abs() < 1e-13);
    }

    #[test]
    fn decreasing_function() {
        let x = bisect(|x| 1.0 - x, 0.0, 3.0, 1e-12).unwrap();
        assert!((x - 1.0).abs() < 1e-11);
    }

    #[test]
    fn rejects_missing_sign_change() {
        assert!(bisect(|x| x * x + 1.0, -1.0, 1.0, 1e-10).is_err());
        assert!(bisect(|x| x, 1.0, 0.0, 1e-10).is_err());
    }

    #[test]
    fn endpoint_zero() {
        assert_eq!(bisect(|x| x - 1.0, 1.0, 2.0, 1e-10).unwrap(), 1.0);
    }
}
