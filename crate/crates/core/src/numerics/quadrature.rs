//! Adaptive Simpson quadrature for one-period averages.

use crate::error::{Error, Result};

const PANELS: usize = 32;
const MAX_DEPTH: u32 = 40;

/// Absolute tolerance on the returned average.
pub const AVERAGE_TOLERANCE: f64 = 1e-10;

/// `(1/T) ∫₀ᵀ f(t) dt`.
pub fn period_average<F: Fn(f64) -> f64>(f: F, period: f64) -> Result<f64> {
    integrate(&f, 0.0, period, AVERAGE_TOLERANCE * period).map(|v| v / period)
}

/// `∫ₐᵇ f(t) dt` to absolute tolerance `tol`.
pub fn integrate<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> Result<f64> {
    if !(b > a) || !a.is_finite() || !b.is_finite() {
        return Err(Error::domain(format!("integration interval [{a}, {b}] is empty or infinite")));
    }
    let h = (b - a) / PANELS as f64;
    let mut total = 0.0;
    let mut unresolved = 0.0;
    for k in 0..PANELS {
        let lo = a + k as f64 * h;
        let hi = if k + 1 == PANELS { b } else { lo + h };
        let (flo, fmid, fhi) = (f(lo), f(0.5 * (lo + hi)), f(hi));
        let whole = simpson(lo, hi, flo, fmid, fhi);
        total += refine(f, lo, hi, flo, fmid, fhi, whole, tol / PANELS as f64, MAX_DEPTH, &mut unresolved);
    }
    if !total.is_finite() {
        return Err(Error::Numerical {
            message: "integrand produced a non-finite value".into(),
            residual: f64::INFINITY,
        });
    }
    if unresolved > tol {
        return Err(Error::Numerical {
            message: "adaptive Simpson quadrature did not converge".into(),
            residual: unresolved,
        });
    }
    Ok(total)
}

fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn refine<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
    unresolved: &mut f64,
) -> f64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let diff = left + right - whole;
    if diff.abs() <= 15.0 * tol {
        return left + right + diff / 15.0;
    }
    if depth == 0 || !diff.is_finite() {
        *unresolved += diff.abs();
        return left + right;
    }
    refine(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1, unresolved)
        + refine(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1, unresolved)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::bessel_j;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI, TAU};

    #[test]
    fn full_period_cosine_averages_to_zero() {
        let w = 3.3;
        let v = period_average(|t| (w * t).cos(), TAU / w).unwrap();
        assert!(v.abs() < 1e-12);
    }

    #[test]
    fn jacobi_anger_identities() {
        let w = TAU * 6.0;
        let period = TAU / w;
        for cap in [FRAC_PI_4, FRAC_PI_2, PI] {
            let j0 = period_average(|t| (2.0 * cap * (w * t).cos()).cos(), period).unwrap();
            let j1 = period_average(|t| (w * t).cos() * (2.0 * cap * (w * t).cos()).sin(), period).unwrap();
            assert!((j0 - bessel_j(0, 2.0 * cap).unwrap()).abs() < 1e-10);
            assert!((j1 - bessel_j(1, 2.0 * cap).unwrap()).abs() < 1e-10);
        }
    }

    #[test]
    fn polynomial_is_exact() {
        let v = integrate(&|t: f64| t * t * t, 0.0, 2.0, 1e-12).unwrap();
        assert!((v - 4.0).abs() < 1e-13);
    }

    #[test]
    fn non_finite_integrand_is_numerical_error() {
        let r = period_average(|t| 1.0 / (t - 0.5), 1.0);
        assert!(matches!(r, Err(Error::Numerical { .. })));
    }

    #[test]
    fn empty_interval_is_rejected() {
        assert!(matches!(period_average(|t| t, 0.0), Err(Error::Domain(_))));
    }
}
