use crate::error::{domain, Error, Result};
use crate::kernels::{ln_gamma, Kernel, KernelFamily};
use serde::Serialize;
use std::f64::consts::{PI, SQRT_2};

const EMPIRICAL_BOOTSTRAP_TAU: usize = 50;
const EMPIRICAL_GRID: usize = 512;
const REMARK_BETA: f64 = 0.5;

/// How the truncation index was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum TauRule {
    /// Closed-form Poisson bound.
    Poisson,
    /// Closed-form bound with the multiquadric decay constant, α ∈ [−1, 0).
    Multiquadric,
    /// Tail-sum search with an empirical lower constant, α < −1.
    EmpiricalTail,
    /// Fixed Gaussian rule.
    Gaussian,
}

/// Truncation of the periodized symbol to the terms |k| ≤ τ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TruncationPlan {
    #[serde(skip)]
    pub kernel: Kernel,
    pub epsilon: f64,
    pub tau: usize,
    /// Prefactor γ of the bound φ̂(r) ≤ γ e^{−cr} on the tail; absent for the Gaussian.
    pub gamma: Option<f64>,
    /// Lower constant D with S(ξ) ≥ D e^{−4πc}; absent for the Gaussian.
    pub d_lower: Option<f64>,
    pub rule: TauRule,
}

impl TruncationPlan {
    /// Number of periodization terms, 2τ + 1.
    pub fn terms(&self) -> usize {
        2 * self.tau + 1
    }
}

fn ln_cosh(x: f64) -> f64 {
    let a = x.abs();
    a + (-2.0 * a).exp().ln_1p() - 2f64.ln()
}

fn ceil_tau(raw: f64) -> usize {
    if raw.is_finite() && raw > 1.0 {
        raw.ceil() as usize
    } else {
        1
    }
}

/// ln of 2^{1+α}/Γ(−α) · c^α.
fn ln_mq_scale(alpha: f64, c: f64) -> f64 {
    (1.0 + alpha) * 2f64.ln() - ln_gamma(-alpha) + alpha * c.ln()
}

/// Smallest τ with a truncation error at most ε relative to the full symbol.
pub fn compute_tau(kernel: &Kernel, epsilon: f64) -> Result<TruncationPlan> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(domain(format!("epsilon must lie in (0, 1), got {epsilon}")));
    }
    let ln_inv_eps = -epsilon.ln();
    match kernel.family() {
        KernelFamily::Gaussian => {
            let raw = (2.0 / (PI * PI)) * (epsilon / 4.0).ln().abs() + 4.0;
            Ok(TruncationPlan {
                kernel: *kernel,
                epsilon,
                tau: ceil_tau(raw),
                gamma: None,
                d_lower: None,
                rule: TauRule::Gaussian,
            })
        }
        KernelFamily::Poisson => {
            let c = kernel.shape();
            let two_pi_c = 2.0 * PI * c;
            let ln_const = (4.0 * PI * SQRT_2).ln() + ln_cosh(c * PI) - (-(-two_pi_c).exp()).ln_1p();
            let raw = ln_inv_eps / two_pi_c + 1.0 + ln_const / two_pi_c;
            Ok(TruncationPlan {
                kernel: *kernel,
                epsilon,
                tau: ceil_tau(raw),
                gamma: Some(PI / c),
                d_lower: Some(1.0 / (2.0 * c * SQRT_2)),
                rule: TauRule::Poisson,
            })
        }
        KernelFamily::Multiquadric => {
            let alpha = kernel.alpha().unwrap_or(f64::NAN);
            if alpha >= 0.0 {
                return Err(Error::Unsupported(format!("truncation requires alpha < 0, got {alpha}")));
            }
            if alpha >= -1.0 {
                closed_form_plan(kernel, alpha, epsilon)
            } else {
                empirical_plan(kernel, alpha, epsilon)
            }
        }
    }
}

fn closed_form_plan(kernel: &Kernel, alpha: f64, epsilon: f64) -> Result<TruncationPlan> {
    let c = kernel.shape();
    let nu = alpha + 0.5;
    let two_pi_c = 2.0 * PI * c;
    let ln_scale = ln_mq_scale(alpha, c);
    let ln_gamma_const = ln_scale + (2.0 * PI).ln() + (-alpha - 1.0) * PI.ln() + nu * nu / (2.0 * c * PI);
    let ln_d = REMARK_BETA.ln() + ln_scale + (-alpha - 1.0) * (2.0 * PI).ln() - two_pi_c;
    let numer = -epsilon.ln() + 2f64.ln() + ln_gamma_const + ln_cosh(c * PI);
    let denom = ln_d + (-(-two_pi_c).exp()).ln_1p();
    let raw = 1.0 + (numer - denom) / two_pi_c;
    Ok(TruncationPlan {
        kernel: *kernel,
        epsilon,
        tau: ceil_tau(raw),
        gamma: Some(ln_gamma_const.exp()),
        d_lower: Some(ln_d.exp()),
        rule: TauRule::Multiquadric,
    })
}

/// ln of λ r^{−α−1} e^{−cr} e^{ν²/(2cr)}, the Bessel-bound majorant of φ̂(r).
fn ln_majorant(alpha: f64, c: f64, r: f64) -> f64 {
    let nu = alpha + 0.5;
    ln_mq_scale(alpha, c) + (2.0 * PI).ln() + (-alpha - 1.0) * r.ln() - c * r + nu * nu / (2.0 * c * r)
}

/// The majorant made nonincreasing: its supremum over [r, ∞).
fn ln_majorant_envelope(alpha: f64, c: f64, r: f64) -> f64 {
    let p = -alpha - 1.0;
    let nu = alpha + 0.5;
    let disc = p * p - 2.0 * nu * nu;
    let turning = if disc >= 0.0 { (p + disc.sqrt()) / (2.0 * c) } else { 0.0 };
    ln_majorant(alpha, c, r.max(turning))
}

/// Neumaier summation.
#[derive(Default)]
struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if !t.is_finite() {
            self.sum = t;
            return;
        }
        if self.sum.abs() >= v.abs() {
            self.carry += (self.sum - t) + v;
        } else {
            self.carry += (v - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

fn ln_sum_exp(values: &[f64]) -> f64 {
    let m = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + values.iter().map(|v| (v - m).exp()).sum::<f64>().ln()
}

fn empirical_plan(kernel: &Kernel, alpha: f64, epsilon: f64) -> Result<TruncationPlan> {
    let c = kernel.shape();
    let bootstrap = TruncationPlan {
        kernel: *kernel,
        epsilon,
        tau: 10 * EMPIRICAL_BOOTSTRAP_TAU,
        gamma: None,
        d_lower: None,
        rule: TauRule::EmpiricalTail,
    };
    // S is even, so the grid over (−π, π] reduces to [0, π].
    let mut min_ln_s = f64::INFINITY;
    for i in 0..=EMPIRICAL_GRID / 2 {
        let xi = PI * i as f64 / (EMPIRICAL_GRID / 2) as f64;
        min_ln_s = min_ln_s.min(ln_symbol_converged(&bootstrap, xi)?);
    }
    let ln_d = min_ln_s - 2f64.ln();
    let ln_target = epsilon.ln() + ln_d - 4.0 * PI * c;

    let tail = |tau: usize| -> f64 {
        let mut terms = Vec::new();
        let mut k = tau + 1;
        loop {
            let v = ln_majorant_envelope(alpha, c, PI * (2 * k - 1) as f64);
            terms.push(v);
            if v < terms[0] - 50.0 || k > tau + 100_000 {
                break;
            }
            k += 1;
        }
        2f64.ln() + ln_sum_exp(&terms)
    };
    let mut tau = 1;
    while tail(tau) > ln_target {
        tau += 1;
        if tau > 100_000 {
            return Err(Error::NumericalConsistency("truncation search did not terminate".into()));
        }
    }
    let r0 = PI * (2 * tau + 1) as f64;
    let gamma_eff = (ln_majorant_envelope(alpha, c, r0) + c * r0).exp();
    Ok(TruncationPlan {
        kernel: *kernel,
        epsilon,
        tau,
        gamma: Some(gamma_eff),
        d_lower: Some(ln_d.exp()),
        rule: TauRule::EmpiricalTail,
    })
}

/// Representative of ξ in (−π, π] and the shift index k with ξ = ξ* + 2πk.
pub fn reduce_frequency(xi: f64) -> (f64, i64) {
    let two_pi = 2.0 * PI;
    let mut k = (xi / two_pi).round();
    let mut r = xi - k * two_pi;
    if r <= -PI {
        r += two_pi;
        k -= 1.0;
    } else if r > PI {
        r -= two_pi;
        k += 1.0;
    }
    (r, k as i64)
}

/// ln φ̂ at ξ* + 2πk for k = 0, 1, −1, 2, −2, … up to τ.
fn ln_symbol_terms(plan: &TruncationPlan, xi_star: f64) -> Result<Vec<f64>> {
    let kernel = &plan.kernel;
    let mut terms = Vec::with_capacity(2 * plan.tau + 1);
    terms.push(kernel.ln_fourier_or_limit(xi_star)?);
    for k in 1..=plan.tau {
        let shift = 2.0 * PI * k as f64;
        terms.push(kernel.ln_fourier_or_limit(xi_star + shift)?);
        terms.push(kernel.ln_fourier_or_limit(xi_star - shift)?);
    }
    Ok(terms)
}

/// ln S_τ with an early exit once the remaining terms are below roundoff.
fn ln_symbol_converged(plan: &TruncationPlan, xi_star: f64) -> Result<f64> {
    let kernel = &plan.kernel;
    let mut terms = vec![kernel.ln_fourier_or_limit(xi_star)?];
    for k in 1..=plan.tau {
        let shift = 2.0 * PI * k as f64;
        let hi = kernel.ln_fourier_or_limit(xi_star + shift)?;
        let lo = kernel.ln_fourier_or_limit(xi_star - shift)?;
        terms.push(hi);
        terms.push(lo);
        let head = ln_sum_exp(&terms);
        if hi.max(lo) < head - 60.0 {
            break;
        }
    }
    Ok(ln_sum_exp(&terms))
}

/// S_τ(ξ) = Σ_{|k|≤τ} φ̂(ξ* + 2πk).
pub fn periodized_symbol(plan: &TruncationPlan, xi: f64) -> Result<f64> {
    if !xi.is_finite() {
        return Err(domain(format!("non-finite frequency {xi}")));
    }
    let (xi_star, _) = reduce_frequency(xi);
    let kernel = &plan.kernel;
    let mut sum = CompensatedSum::default();
    sum.add(kernel.fourier_or_limit(xi_star)?);
    for k in 1..=plan.tau {
        let shift = 2.0 * PI * k as f64;
        sum.add(kernel.fourier_or_limit(xi_star + shift)?);
        sum.add(kernel.fourier_or_limit(xi_star - shift)?);
    }
    Ok(sum.value())
}

/// ln S_τ(ξ), robust against underflow of the individual terms.
pub fn ln_periodized_symbol(plan: &TruncationPlan, xi: f64) -> Result<f64> {
    if !xi.is_finite() {
        return Err(domain(format!("non-finite frequency {xi}")));
    }
    let (xi_star, _) = reduce_frequency(xi);
    Ok(ln_sum_exp(&ln_symbol_terms(plan, xi_star)?))
}

/// D e^{−4πc}, a lower bound for the periodized symbol.
pub fn periodized_symbol_lower_bound(plan: &TruncationPlan) -> Result<f64> {
    match (plan.rule, plan.d_lower) {
        (TauRule::Poisson | TauRule::Multiquadric, Some(d)) => Ok(d * (-4.0 * PI * plan.kernel.shape()).exp()),
        (TauRule::EmpiricalTail, _) => Err(Error::Unsupported("no analytic lower constant for alpha < -1".into())),
        _ => Err(Error::Unsupported(format!("no symbol lower bound for {}", plan.kernel))),
    }
}

/// L̂(ξ) = φ̂(ξ)/S_τ(ξ).
pub fn cardinal_hat(plan: &TruncationPlan, xi: f64) -> Result<f64> {
    if !xi.is_finite() {
        return Err(domain(format!("non-finite frequency {xi}")));
    }
    let (xi_star, shift) = reduce_frequency(xi);
    let kernel = &plan.kernel;
    if xi_star == 0.0 && kernel.family() == KernelFamily::Multiquadric && kernel.alpha().unwrap_or(0.0) >= -0.5 {
        // φ̂ blows up at the lattice point, so the ratio tends to the indicator of k = 0.
        return Ok(if shift == 0 { 1.0 } else { 0.0 });
    }
    let terms = ln_symbol_terms(plan, xi_star)?;
    let own = kernel.ln_fourier_or_limit(xi)?;
    let top = terms.iter().cloned().fold(own, f64::max);
    let mut denom = CompensatedSum::default();
    for t in &terms {
        denom.add((t - top).exp());
    }
    Ok((own - top).exp() / denom.value())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn poisson(c: f64) -> Kernel {
        Kernel::poisson(c).unwrap()
    }

    #[test]
    fn tau_examples() {
        let p = compute_tau(&poisson(1.0), 1e-16).unwrap();
        assert_eq!(p.tau, 8);
        assert_eq!(p.terms(), 17);
        let g = compute_tau(&Kernel::gaussian(1.0).unwrap(), 1e-16).unwrap();
        assert_eq!(g.tau, 12);
        assert!(g.gamma.is_none() && g.d_lower.is_none());
    }

    #[test]
    fn poisson_tau_at_quad_precision() {
        // The bound evaluates to 13.57..., so the smallest admissible integer is 14.
        let p = compute_tau(&poisson(1.0), 1e-32).unwrap();
        assert_eq!(p.tau, 14);
    }

    #[test]
    fn poisson_constants() {
        let p = compute_tau(&poisson(2.0), 1e-8).unwrap();
        assert_relative_eq!(p.gamma.unwrap(), PI / 2.0);
        assert_relative_eq!(p.d_lower.unwrap(), 1.0 / (4.0 * SQRT_2));
    }

    #[test]
    fn tau_satisfies_defining_inequality() {
        for kernel in [
            poisson(0.5),
            poisson(1.0),
            Kernel::multiquadric(-0.75, 1.0).unwrap(),
            Kernel::multiquadric(-1.0, 2.0).unwrap(),
        ] {
            for eps in [1e-8, 1e-12, 1e-16] {
                let plan = compute_tau(&kernel, eps).unwrap();
                let c = kernel.shape();
                let q = (-2.0 * PI * c).exp();
                let lhs = |tau: usize| {
                    (2.0 * plan.gamma.unwrap() * (c * PI).cosh() / (1.0 - q)).ln() - 2.0 * PI * c * (tau as f64 + 1.0)
                };
                let rhs = (eps * plan.d_lower.unwrap()).ln() - 4.0 * PI * c;
                assert!(lhs(plan.tau) <= rhs + 1e-12);
                if plan.tau > 1 {
                    assert!(lhs(plan.tau - 1) > rhs);
                }
            }
        }
    }

    #[test]
    fn generic_alpha_minus_one_matches_poisson_d() {
        let plan = compute_tau(&Kernel::multiquadric(-1.0, 1.0).unwrap(), 1e-12).unwrap();
        // D = β·(2^0/Γ(1))·c^{-1}·(2π)^0·e^{−2πc}
        assert_relative_eq!(plan.d_lower.unwrap(), 0.5 * (-2.0 * PI).exp(), max_relative = 1e-13);
    }

    #[test]
    fn bad_epsilon_and_kernel() {
        for eps in [0.0, 1.0, 2.0, -1e-3, f64::NAN] {
            assert!(matches!(compute_tau(&poisson(1.0), eps), Err(Error::Domain(_))));
        }
        let pos = Kernel::multiquadric(0.5, 1.0).unwrap();
        assert!(matches!(compute_tau(&pos, 1e-8), Err(Error::Unsupported(_))));
    }

    #[test]
    fn symbol_at_zero_geometric_oracle() {
        let plan = TruncationPlan { tau: 8, ..compute_tau(&poisson(1.0), 1e-16).unwrap() };
        let q = (-2.0 * PI).exp();
        let oracle = PI * (1.0 + 2.0 * q * (1.0 - q.powi(8)) / (1.0 - q));
        assert_relative_eq!(periodized_symbol(&plan, 0.0).unwrap(), oracle, max_relative = 1e-16);
        let full = PI * (1.0 + 2.0 * q / (1.0 - q));
        let hat = cardinal_hat(&plan, 0.0).unwrap();
        assert_relative_eq!(hat, PI / oracle, max_relative = 1e-15);
        assert!(((hat - PI / full) / (PI / full)).abs() <= 1e-16);
    }

    /// Sum of the terms smallest first, in pairwise-exact two-sum form.
    fn accurate_sum(mut terms: Vec<f64>) -> f64 {
        terms.sort_by(|a, b| a.abs().partial_cmp(&b.abs()).unwrap());
        let (mut s, mut e) = (0.0f64, 0.0f64);
        for v in terms {
            let t = s + v;
            let bp = t - s;
            e += (s - (t - bp)) + (v - bp);
            s = t;
        }
        s + e
    }

    #[test]
    fn symbol_long_sum_oracle() {
        let plan = compute_tau(&poisson(1.0), 1e-16).unwrap();
        assert_eq!(plan.tau, 8);
        let xi = PI / 2.0;
        let mut terms = vec![PI * (-xi).exp()];
        for k in 1..=200 {
            let s = 2.0 * PI * k as f64;
            terms.push(PI * (-(xi + s).abs()).exp());
            terms.push(PI * (-(xi - s).abs()).exp());
        }
        let oracle = accurate_sum(terms);
        assert!(((periodized_symbol(&plan, xi).unwrap() - oracle) / oracle).abs() <= 1e-16);
    }

    #[test]
    fn periodicity() {
        let plan = compute_tau(&Kernel::multiquadric(-1.5, 1.0).unwrap(), 1e-12).unwrap();
        for &xi in &[0.0, 0.5, -1.0, 2.75, PI] {
            // exactly representable shifts reduce back to the same representative
            let a = periodized_symbol(&plan, xi).unwrap();
            let b = periodized_symbol(&plan, xi + 2.0 * PI).unwrap();
            assert!((a - b).abs() <= 4.0 * f64::EPSILON * a, "{xi}: {a} vs {b}");
        }
    }

    #[test]
    fn lower_bound_examples() {
        let p1 = compute_tau(&poisson(1.0), 1e-12).unwrap();
        assert_relative_eq!(
            periodized_symbol_lower_bound(&p1).unwrap(),
            (-4.0 * PI).exp() / (2.0 * SQRT_2),
            max_relative = 1e-14
        );
        let p2 = compute_tau(&poisson(2.0), 1e-12).unwrap();
        assert_relative_eq!(
            periodized_symbol_lower_bound(&p2).unwrap(),
            (-8.0 * PI).exp() / (4.0 * SQRT_2),
            max_relative = 1e-14
        );
        let steep = compute_tau(&Kernel::multiquadric(-1.5, 1.0).unwrap(), 1e-8).unwrap();
        assert!(matches!(periodized_symbol_lower_bound(&steep), Err(Error::Unsupported(_))));
    }

    #[test]
    fn lower_bound_below_grid_minimum() {
        for kernel in [poisson(1.0), poisson(0.5), Kernel::multiquadric(-0.75, 1.0).unwrap()] {
            let plan = compute_tau(&kernel, 1e-12).unwrap();
            let bound = periodized_symbol_lower_bound(&plan).unwrap();
            for i in 0..512 {
                let xi = -PI + 2.0 * PI * (i + 1) as f64 / 512.0;
                assert!(periodized_symbol(&plan, xi).unwrap() >= bound);
            }
        }
    }

    #[test]
    fn empirical_plan_is_reported() {
        let plan = compute_tau(&Kernel::multiquadric(-1.5, 1.0).unwrap(), 1e-16).unwrap();
        assert_eq!(plan.rule, TauRule::EmpiricalTail);
        assert!(plan.tau >= 1 && plan.gamma.unwrap() > 0.0 && plan.d_lower.unwrap() > 0.0);
    }

    #[test]
    fn singular_symbol_for_shallow_alpha() {
        let plan = compute_tau(&Kernel::multiquadric(-0.25, 1.0).unwrap(), 1e-12).unwrap();
        assert!(matches!(periodized_symbol(&plan, 0.0), Err(Error::Singularity(_))));
        assert_eq!(cardinal_hat(&plan, 0.0).unwrap(), 1.0);
        assert_eq!(cardinal_hat(&plan, 2.0 * PI).unwrap(), 0.0);
    }

    #[test]
    fn reduction() {
        assert_eq!(reduce_frequency(PI), (PI, 0));
        let (r, k) = reduce_frequency(-PI);
        assert_relative_eq!(r, PI);
        assert_eq!(k, -1);
        let (r, k) = reduce_frequency(7.0);
        assert_relative_eq!(r, 7.0 - 2.0 * PI, max_relative = 1e-15);
        assert_eq!(k, 1);
    }

    proptest! {
        #[test]
        fn hat_is_even_and_in_unit_interval(xi in -40.0f64..40.0, c in 0.3f64..4.0) {
            let plan = compute_tau(&poisson(c), 1e-12).unwrap();
            let a = cardinal_hat(&plan, xi).unwrap();
            let b = cardinal_hat(&plan, -xi).unwrap();
            prop_assert!(a >= 0.0 && a <= 1.0);
            prop_assert!((a - b).abs() <= 1e-15);
        }

        #[test]
        fn frequency_partition_of_unity(xi in -PI..PI, alpha in -2.5f64..-0.1, c in 0.3f64..3.0) {
            let plan = compute_tau(&Kernel::multiquadric(alpha, c).unwrap(), 1e-12).unwrap();
            let mut sum = 0.0;
            for k in -(plan.tau as i64)..=(plan.tau as i64) {
                sum += cardinal_hat(&plan, xi + 2.0 * PI * k as f64).unwrap();
            }
            prop_assert!((sum - 1.0).abs() <= 1e-12);
        }
    }
}
