//! Modified Bessel function of the second kind K_ν(r) for real order.
//!
//! Half-integer orders use the terminating elementary series. Other orders
//! integrate e^{r} K_ν(r) = ∫₀^∞ exp(−2r sinh²(t/2)) cosh(νt) dt with the
//! trapezoid rule, which converges geometrically for this analytic integrand.

use crate::error::{domain, Result};
use std::f64::consts::PI;

const MAX_HALF_INTEGER: f64 = 40.0;
const REL_TOL: f64 = 1e-15;
const MAX_LEVELS: usize = 14;

fn check_args(nu: f64, r: f64) -> Result<()> {
    if !nu.is_finite() || !r.is_finite() {
        return Err(domain(format!("non-finite Bessel argument (nu = {nu}, r = {r})")));
    }
    if r <= 0.0 {
        return Err(domain(format!("Bessel K requires r > 0, got {r}")));
    }
    Ok(())
}

fn half_integer_index(nu: f64) -> Option<u32> {
    let n = nu.abs() - 0.5;
    let rounded = n.round();
    if n >= -1e-14 && (n - rounded).abs() <= 1e-13 && rounded <= MAX_HALF_INTEGER {
        Some(rounded as u32)
    } else {
        None
    }
}

/// e^{r} K_{n+1/2}(r) from the terminating series.
fn scaled_half_integer(n: u32, r: f64) -> f64 {
    let n = n as f64;
    let inv = 1.0 / (2.0 * r);
    let mut coef = 1.0;
    let mut pow = 1.0;
    let mut sum = 1.0;
    let mut k = 0.0;
    while k < n {
        coef *= (n + k + 1.0) * (n - k) / (k + 1.0);
        pow *= inv;
        sum += coef * pow;
        k += 1.0;
    }
    (PI / (2.0 * r)).sqrt() * sum
}

fn integrand(nu: f64, r: f64, t: f64) -> f64 {
    let s = (0.5 * t).sinh();
    let base = -2.0 * r * s * s;
    0.5 * ((base + nu * t).exp() + (base - nu * t).exp())
}

/// Sum of f(t0 + k·step) for k ≥ 0, stopped once past the peak and negligible.
fn tail_sum(nu: f64, r: f64, t0: f64, step: f64, peak: f64) -> f64 {
    let mut sum = 0.0;
    let mut k = 0usize;
    loop {
        let t = t0 + k as f64 * step;
        let term = integrand(nu, r, t);
        sum += term;
        if (t > peak && term <= 1e-19 * sum) || t > 80.0 {
            return sum;
        }
        k += 1;
    }
}

/// e^{r} K_ν(r) by the trapezoid rule, for any real order.
pub fn bessel_k_scaled_quadrature(nu: f64, r: f64) -> Result<f64> {
    check_args(nu, r)?;
    let nu = nu.abs();
    let peak = (nu / r).asinh();
    let mut h = 0.5;
    let mut total = h * (0.5 * integrand(nu, r, 0.0) + tail_sum(nu, r, h, h, peak));
    for level in 0..MAX_LEVELS {
        let odd = tail_sum(nu, r, 0.5 * h, h, peak);
        h *= 0.5;
        let refined = 0.5 * total + h * odd;
        let change = (refined - total).abs();
        total = refined;
        if level >= 1 && change <= REL_TOL * refined {
            break;
        }
    }
    Ok(total)
}

/// e^{r} K_ν(r).
pub fn bessel_k_scaled(nu: f64, r: f64) -> Result<f64> {
    check_args(nu, r)?;
    match half_integer_index(nu) {
        Some(n) => Ok(scaled_half_integer(n, r)),
        None => bessel_k_scaled_quadrature(nu, r),
    }
}

/// K_ν(r), r > 0.
pub fn bessel_k(nu: f64, r: f64) -> Result<f64> {
    Ok(bessel_k_scaled(nu, r)? * (-r).exp())
}

/// ln K_ν(r), finite where K_ν itself under- or overflows.
pub fn ln_bessel_k(nu: f64, r: f64) -> Result<f64> {
    Ok(bessel_k_scaled(nu, r)?.ln() - r)
}

/// √(2π) r^{−1/2} e^{−r} e^{ν²/(2r)}, an upper bound for K_ν(r).
pub fn bessel_k_upper_bound(nu: f64, r: f64) -> Result<f64> {
    Ok(ln_bessel_k_upper_bound(nu, r)?.exp())
}

pub fn ln_bessel_k_upper_bound(nu: f64, r: f64) -> Result<f64> {
    check_args(nu, r)?;
    Ok(0.5 * (2.0 * PI).ln() - 0.5 * r.ln() - r + nu * nu / (2.0 * r))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    /// Adaptive Simpson on [a, b], used as an independent oracle.
    fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
        fn rec(
            f: &dyn Fn(f64) -> f64,
            a: f64,
            b: f64,
            fa: f64,
            fm: f64,
            fb: f64,
            whole: f64,
            tol: f64,
            depth: u32,
        ) -> f64 {
            let m = 0.5 * (a + b);
            let lm = 0.5 * (a + m);
            let rm = 0.5 * (m + b);
            let flm = f(lm);
            let frm = f(rm);
            let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
            let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
            let delta = left + right - whole;
            if depth == 0 || delta.abs() <= 15.0 * tol {
                return left + right + delta / 15.0;
            }
            rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
                + rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
        }
        let fa = f(a);
        let fb = f(b);
        let fm = f(0.5 * (a + b));
        let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
        rec(f, a, b, fa, fm, fb, whole, tol, 50)
    }

    #[test]
    fn k0_at_one_matches_defining_integral() {
        // e^{-cosh T} < 1e-18 for T = 5
        let oracle = adaptive_simpson(&|t: f64| (-t.cosh()).exp(), 0.0, 5.0, 1e-17);
        assert_relative_eq!(oracle, 0.421_024_438_240_708_333_335_627_9, max_relative = 1e-14);
        assert_relative_eq!(bessel_k(0.0, 1.0).unwrap(), oracle, max_relative = 1e-13);
    }

    #[test]
    fn half_order_closed_form() {
        let want = (PI / 4.0).sqrt() * (-2.0f64).exp();
        assert_relative_eq!(bessel_k(0.5, 2.0).unwrap(), want, max_relative = 1e-15);
        assert_eq!(bessel_k(-0.5, 2.0).unwrap(), bessel_k(0.5, 2.0).unwrap());
    }

    #[test]
    fn reference_values() {
        // mpmath besselk, 25 digits
        let cases = [
            (0.0, 1e-6, 13.931_442_073_626_419_458_688_96),
            (0.0, 0.1, 2.427_069_024_702_016_557_818_679),
            (0.3, 0.5, 0.976_474_124_381_787_917_082_000_2),
            (-0.5, 1.0, 0.461_068_504_447_894_558_439_575_9),
            (1.0, 2.5, 0.073_890_816_347_747_063_648_993_54),
            (2.2, 7.0, 5.862_976_902_059_184_315_030_011e-4),
            (3.7, 0.01, 680_739_416.857_525_808_171_53),
            (5.0, 1e-6, 3.839_999_999_999_760_868_836_253e32),
            (4.5, 50.0, 4.166_808_349_964_504_527_675_411e-23),
            (0.0, 50.0, 3.410_167_749_789_495_513_920_676e-23),
            (-1.0, 1e-3, 999.996_238_156_085_553_461_203_8),
            (1.5, 3.0, 0.048_034_646_842_352_790_087_347_28),
        ];
        for (nu, r, want) in cases {
            assert_relative_eq!(bessel_k(nu, r).unwrap(), want, max_relative = 1e-12);
        }
    }

    #[test]
    fn quadrature_agrees_with_closed_forms() {
        for n in 0..5 {
            let nu = n as f64 + 0.5;
            for &r in &[1e-6, 1e-3, 0.1, 1.0, 4.0, 17.0, 50.0] {
                let closed = scaled_half_integer(n, r);
                let quad = bessel_k_scaled_quadrature(nu, r).unwrap();
                assert_relative_eq!(quad, closed, max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn upper_bound_examples() {
        assert_relative_eq!(
            bessel_k_upper_bound(0.0, 1.0).unwrap(),
            (2.0 * PI).sqrt() * (-1.0f64).exp(),
            max_relative = 1e-15
        );
        assert!(bessel_k_upper_bound(0.5, 2.0).unwrap() >= bessel_k(0.5, 2.0).unwrap());
        // For half orders the ratio is exactly 2·e^{ν²/(2r)}.
        let ratio = bessel_k_upper_bound(-0.5, 10.0).unwrap() / bessel_k(-0.5, 10.0).unwrap();
        assert_relative_eq!(ratio, 2.0 * (0.25f64 / 20.0).exp(), max_relative = 1e-14);
    }

    #[test]
    fn bound_dominates_on_grid() {
        for i in 0..=8 {
            let nu = -2.0 + 0.5 * i as f64;
            for j in 0..60 {
                let r = 0.1 + j as f64 * 0.5;
                let k = bessel_k(nu, r).unwrap();
                assert!(k > 0.0);
                assert!(k <= bessel_k_upper_bound(nu, r).unwrap());
            }
        }
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(bessel_k(0.0, 0.0).is_err());
        assert!(bessel_k(0.0, -1.0).is_err());
        assert!(bessel_k(f64::NAN, 1.0).is_err());
        assert!(bessel_k(0.0, f64::INFINITY).is_err());
        assert!(bessel_k_upper_bound(0.0, 0.0).is_err());
    }

    proptest! {
        #[test]
        fn symmetric_in_order(nu in -5.0f64..5.0, r in 1e-3f64..50.0) {
            let a = bessel_k(nu, r).unwrap();
            let b = bessel_k(-nu, r).unwrap();
            prop_assert!((a - b).abs() <= 1e-15 * a);
        }

        #[test]
        fn three_term_recurrence(nu in -3.9f64..3.9, r in 1e-2f64..40.0) {
            let lo = bessel_k_scaled(nu - 1.0, r).unwrap();
            let mid = bessel_k_scaled(nu, r).unwrap();
            let hi = bessel_k_scaled(nu + 1.0, r).unwrap();
            let rhs = lo + 2.0 * nu / r * mid;
            prop_assert!((hi - rhs).abs() <= 1e-12 * hi.abs().max(lo.abs() + (2.0 * nu / r * mid).abs()));
        }
    }
}
