//! Bisection root finding for the toolkit's parameter thresholds.

use crate::error::{Error, Result};

/// Outcome of a bisection run for a named threshold.
#[derive(Debug, Clone)]
pub struct ThresholdResult {
    pub name: String,
    /// Final bracketing interval around the root.
    pub bracket: (f64, f64),
    /// Midpoint estimate of the crossing.
    pub root: f64,
    /// Width of the final bracket.
    pub tolerance: f64,
    pub iterations: usize,
}

/// Bisects a sign-changing criterion on [lo, hi] until the bracket is
/// narrower than `tol`, capped at 60 iterations. The criterion must have
/// opposite signs at the endpoints.
pub fn find_threshold<F>(name: &str, criterion: F, lo: f64, hi: f64, tol: f64) -> Result<ThresholdResult>
where
    F: Fn(f64) -> Result<f64>,
{
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::Usage("bisection needs a finite interval lo < hi".into()));
    }
    if !(tol > 0.0) {
        return Err(Error::Usage("bisection tolerance must be positive".into()));
    }
    let f_lo = criterion(lo)?;
    let f_hi = criterion(hi)?;
    if !f_lo.is_finite() || !f_hi.is_finite() {
        return Err(Error::Numerical("criterion not finite at the bracket endpoints".into()));
    }
    if f_lo == 0.0 {
        return Ok(ThresholdResult {
            name: name.into(),
            bracket: (lo, lo),
            root: lo,
            tolerance: 0.0,
            iterations: 0,
        });
    }
    if f_hi == 0.0 {
        return Ok(ThresholdResult {
            name: name.into(),
            bracket: (hi, hi),
            root: hi,
            tolerance: 0.0,
            iterations: 0,
        });
    }
    if f_lo.signum() == f_hi.signum() {
        return Err(Error::Bracket(format!(
            "no sign change on [{lo}, {hi}]: f(lo) = {f_lo}, f(hi) = {f_hi}"
        )));
    }

    let (mut a, mut b) = (lo, hi);
    let mut f_a = f_lo;
    let mut iterations = 0;
    while b - a > tol && iterations < 60 {
        let mid = 0.5 * (a + b);
        let f_mid = criterion(mid)?;
        if !f_mid.is_finite() {
            return Err(Error::Numerical(format!("criterion not finite at {mid}")));
        }
        if f_mid == 0.0 {
            a = mid;
            b = mid;
            break;
        }
        if f_mid.signum() == f_a.signum() {
            a = mid;
            f_a = f_mid;
        } else {
            b = mid;
        }
        iterations += 1;
    }

    Ok(ThresholdResult {
        name: name.into(),
        bracket: (a, b),
        root: 0.5 * (a + b),
        tolerance: b - a,
        iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symplectic::fs_mixture_nu_tilde_minus;
    use approx::assert_relative_eq;

    #[test]
    fn finds_a_polynomial_root() {
        let res = find_threshold("cube", |x| Ok(x * x * x - 2.0), 0.0, 2.0, 1e-12).unwrap();
        assert_relative_eq!(res.root, 2f64.cbrt(), epsilon = 1e-11);
        assert!(res.bracket.0 <= res.root && res.root <= res.bracket.1);
        assert!(res.iterations <= 60);
    }

    #[test]
    fn finds_the_full_inseparability_threshold() {
        let res = find_threshold(
            "r1",
            |r| Ok(fs_mixture_nu_tilde_minus(r) - 1.0),
            1.0,
            1.5,
            1e-9,
        )
        .unwrap();
        let exact = 0.5 * ((7.0 + 2.0 * 31f64.sqrt()) / 3.0).acosh();
        assert_relative_eq!(res.root, exact, epsilon = 1e-6);
        assert_relative_eq!(res.root, 1.242747, epsilon = 1e-4);
    }

    #[test]
    fn rejects_bad_brackets() {
        assert!(matches!(
            find_threshold("none", |x| Ok(x * x + 1.0), -1.0, 1.0, 1e-6),
            Err(Error::Bracket(_))
        ));
        assert!(find_threshold("bad", |x| Ok(x), 1.0, 0.0, 1e-6).is_err());
        assert!(find_threshold("bad", |x| Ok(x), -1.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn endpoint_roots_short_circuit() {
        let res = find_threshold("zero", |x| Ok(x), 0.0, 1.0, 1e-6).unwrap();
        assert_eq!(res.root, 0.0);
        assert_eq!(res.iterations, 0);
    }

    #[test]
    fn iteration_cap_holds() {
        // An absurdly tight tolerance must still terminate within the cap.
        let res = find_threshold("tight", |x| Ok(x - 0.1), 0.0, 1.0, 1e-300).unwrap();
        assert!(res.iterations <= 60);
        assert_relative_eq!(res.root, 0.1, epsilon = 1e-15);
    }
}
