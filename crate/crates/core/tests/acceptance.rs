//! Acceptance suite: one line per criterion, nonzero exit if any criterion fails.

use rbf_cardinal::cardinal::{build_cardinal_table, cardinal_hat, compute_tau, periodized_symbol};
use rbf_cardinal::experiments::{
    run_c_convergence, run_conditioning_study, run_h_convergence, run_jitter_study, run_noise_floor,
    CConvergenceConfig, ConditioningConfig, HConvergenceConfig, JitterConfig, NoiseConfig, TableSource,
};
use rbf_cardinal::interpolation::{fit_uniform, SampleSet};
use rbf_cardinal::sampling::{perturbation_budget, perturbed_frame_bounds, FrameBounds};
use rbf_cardinal::{Error, Kernel, KernelFamily};
use std::f64::consts::{LN_2, PI};
use std::sync::Arc;
use std::time::{Duration, Instant};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn tau_field(args: &[&str], key: &str) -> Option<usize> {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv: Vec<&str> = std::iter::once("rbf-cardinal").chain(args.iter().copied()).collect();
    if rbf_cardinal::cli::run(argv, &mut out, &mut err) != 0 {
        return None;
    }
    let prefix = format!("{key}: ");
    String::from_utf8(out).ok()?.lines().find_map(|l| l.strip_prefix(&prefix)?.parse().ok())
}

fn criterion_1() -> Outcome {
    let poisson16 = tau_field(&["tau", "--family", "poisson", "--c", "1", "--eps", "1e-16"], "terms");
    let poisson32 = tau_field(&["tau", "--family", "poisson", "--c", "1", "--eps", "1e-32"], "terms");
    let gaussian = tau_field(&["tau", "--family", "gaussian", "--eps", "1e-16"], "tau");
    let pass = poisson16 == Some(17) && poisson32 == Some(27) && gaussian == Some(12);
    outcome(
        pass,
        format!(
            "poisson eps=1e-16 terms {poisson16:?} (want 17), eps=1e-32 terms {poisson32:?} (want 27), gaussian eps=1e-16 {gaussian:?} (want 12)"
        ),
    )
}

/// Two-sum accumulation of terms sorted by magnitude.
fn accurate_sum(mut terms: Vec<f64>) -> f64 {
    terms.sort_by(|a, b| a.abs().total_cmp(&b.abs()));
    let (mut s, mut e) = (0.0f64, 0.0f64);
    for v in terms {
        let t = s + v;
        let bp = t - s;
        e += (s - (t - bp)) + (v - bp);
        s = t;
    }
    s + e
}

fn criterion_2() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut failures = Vec::new();
    for alpha in [-1.0, -1.5] {
        for c in [0.5, 1.0, 2.0] {
            let kernel = Kernel::multiquadric(alpha, c).unwrap();
            for eps in [1e-8, 1e-12, 1e-16] {
                let plan = compute_tau(&kernel, eps).unwrap();
                let long = 10 * plan.tau.max(1);
                let mut bad = 0;
                for i in 0..512 {
                    let xi = PI * (i as f64 + 0.5) / 512.0;
                    let mut terms = vec![kernel.fourier(xi).unwrap()];
                    for k in 1..=long {
                        let s = 2.0 * PI * k as f64;
                        terms.push(kernel.fourier(xi + s).unwrap());
                        terms.push(kernel.fourier(xi - s).unwrap());
                    }
                    let oracle = accurate_sum(terms);
                    let rel = ((periodized_symbol(&plan, xi).unwrap() - oracle) / oracle).abs();
                    worst = worst.max(rel / eps);
                    if rel > eps {
                        bad += 1;
                    }
                }
                if bad > 0 {
                    failures.push(format!("alpha={alpha} c={c} eps={eps:e}: {bad}/512"));
                }
            }
        }
    }
    outcome(
        failures.is_empty(),
        format!("worst |S_tau - S_oracle|/(S_oracle eps) = {worst:.3e}; failing: {failures:?}"),
    )
}

fn criterion_3() -> Outcome {
    let table = build_cardinal_table(&Kernel::poisson(1.0).unwrap(), 1e-16, 32, 16).unwrap();
    let residual = (-32..=32)
        .map(|j: i64| (table.eval(j as f64).unwrap() - if j == 0 { 1.0 } else { 0.0 }).abs())
        .fold(0.0, f64::max);
    outcome(residual <= 1e-6, format!("max |L(j) - delta_0j| = {residual:e} (bound 1e-6)"))
}

fn criterion_4() -> Outcome {
    let mut worst: f64 = 0.0;
    let kernels = [
        Kernel::poisson(1.0).unwrap(),
        Kernel::multiquadric(-1.5, 1.0).unwrap(),
        Kernel::multiquadric(-0.5, 1.0).unwrap(),
        Kernel::gaussian(1.0).unwrap(),
    ];
    for kernel in kernels {
        let plan = compute_tau(&kernel, 1e-16).unwrap();
        for i in 0..512 {
            let xi = -PI + 2.0 * PI * (i as f64 + 0.5) / 512.0;
            let sum: f64 = (-(plan.tau as i64)..=plan.tau as i64)
                .map(|k| cardinal_hat(&plan, xi + 2.0 * PI * k as f64).unwrap())
                .sum();
            worst = worst.max((sum - 1.0).abs());
        }
    }
    outcome(worst <= 1e-12, format!("max |sum_k L^(xi + 2 pi k) - 1| = {worst:e} (bound 1e-12)"))
}

fn criterion_5() -> Outcome {
    let mut worst: f64 = 0.0;
    for c in [0.5, 1.0, 2.0] {
        let closed = Kernel::poisson(c).unwrap();
        let generic = Kernel::multiquadric(-1.0, c).unwrap();
        for i in 0..=1000 {
            let xi = 0.01 + (30.0 - 0.01) * i as f64 / 1000.0;
            let a = closed.fourier(xi).unwrap();
            let b = generic.fourier(xi).unwrap();
            worst = worst.max(((a - b) / a).abs());
        }
    }
    outcome(worst <= 1e-10, format!("max relative difference {worst:e} (bound 1e-10)"))
}

fn criterion_6() -> Outcome {
    let tables = TableSource::in_memory();
    let p3 = run_h_convergence(&HConvergenceConfig::default(), &tables).unwrap();
    let p1 = run_h_convergence(&HConvergenceConfig { degree: 1, ..Default::default() }, &tables).unwrap();
    let s3 = p3.fit.map_or(f64::NAN, |f| f.slope);
    let s1 = p1.fit.map_or(f64::NAN, |f| f.slope);
    let pass = (2.5..=3.5).contains(&s3) && (0.6..=1.6).contains(&s1);
    outcome(pass, format!("slope p=3 {s3:.3} in [2.5, 3.5], p=1 {s1:.3} in [0.6, 1.6]"))
}

fn criterion_7() -> Outcome {
    let cfg = CConvergenceConfig::default();
    let run = run_c_convergence(&cfg, &TableSource::in_memory()).unwrap();
    let slope = run.fit.map_or(f64::NAN, |f| f.slope);
    let bound = -0.8 * (PI - PI / 2.0);
    let pass = cfg.sigma == PI / 2.0 && cfg.c_grid == [1.0, 2.0, 3.0, 4.0, 5.0, 6.0] && slope <= bound;
    outcome(pass, format!("slope {slope:.3} <= {bound:.3}"))
}

fn criterion_8() -> Outcome {
    let delta = 1e-3;
    let cfg = NoiseConfig { delta_grid: vec![0.0, delta], ..Default::default() };
    let run = run_noise_floor(&cfg, &TableSource::in_memory()).unwrap();
    let curve = |d: f64| -> Vec<f64> { run.rows.iter().filter(|r| r.delta == d).map(|r| r.lattice_error).collect() };
    let noisy = curve(delta);
    let clean = curve(0.0);
    let last = noisy[noisy.len() - 1];
    let prev = noisy[noisy.len() - 2];
    let in_band = (0.1 * delta..=10.0 * delta).contains(&last);
    let plateau = (last - prev).abs() / prev < 0.2;
    let worst_ratio = clean.windows(2).map(|w| w[1] / w[0]).fold(0.0, f64::max);
    let decreasing = worst_ratio <= 0.6;
    let frame = run.rows.iter().map(|r| r.lower_frame_bound).fold(f64::NAN, f64::max);
    outcome(
        in_band && plateau && decreasing,
        format!(
            "final error {last:e} in [1e-4, 1e-2], last-step change {:.3} < 0.2, clean refinement ratio <= {worst_ratio:.3} (need <= 0.6), A = {frame:.6}",
            (last - prev).abs() / prev
        ),
    )
}

fn criterion_9() -> Outcome {
    let cfg = ConditioningConfig::default();
    let run = run_conditioning_study(&cfg, &TableSource::in_memory()).unwrap();
    let conds: Vec<f64> =
        run.rows.iter().filter(|r| r.kernel.family() == KernelFamily::Gaussian).map(|r| r.cond).collect();
    let growth: Vec<f64> =
        conds.windows(2).map(|w| if w[1].is_infinite() { f64::INFINITY } else { w[1] / w[0] }).collect();
    let grows = growth.len() >= 3 && growth.iter().all(|g| *g >= 10.0);
    let bounded = run.rows.iter().all(|r| r.cardinal_error.is_finite() && r.cardinal_error < 1.0);
    let ill = run.rows.iter().filter(|r| r.gram_error.is_none()).count();
    outcome(
        grows && bounded,
        format!("gaussian condition growth per halving {growth:?} (need >= 10 x3); cardinal errors bounded at all {} rows, {ill} ill-conditioned Gram rows", run.rows.len()),
    )
}

fn criterion_10() -> Outcome {
    let fb = FrameBounds::new(1.0, 1.0).unwrap();
    let budget = perturbation_budget(&fb);
    let budget_ok = (budget - LN_2 / PI).abs() <= 1e-12;
    let identity = perturbed_frame_bounds(&fb, 0.0).map(|p| p == fb).unwrap_or(false);
    let exceeded = matches!(perturbed_frame_bounds(&fb, budget), Err(Error::BudgetExceeded { .. }));
    outcome(
        budget_ok && identity && exceeded,
        format!("budget {budget:.15} vs ln2/pi, identity at L=0: {identity}, budget exceeded at L=budget: {exceeded}"),
    )
}

fn criterion_11() -> Outcome {
    let n = 8;
    let kernel = Kernel::poisson(1.0).unwrap();
    let table = Arc::new(build_cardinal_table(&kernel.dilated(n as f64), 1e-12, 2 * n, 16).unwrap());
    let samples = SampleSet::uniform(n, |x| (1.0 - x * x).max(0.0).powi(2) * (3.0 * x).cos());
    let interp = fit_uniform(&samples, &kernel, table).unwrap();
    let worst = (0..100)
        .map(|i| {
            let x = -1.0 + 2.0 * (i as f64 + 0.37) / 100.0;
            (interp.eval(x) - interp.scaled_eval(x)).abs()
        })
        .fold(0.0, f64::max);
    outcome(worst <= 1e-8, format!("max |direct - rescaled| = {worst:e} over 100 probes (bound 1e-8)"))
}

fn criterion_12() -> Outcome {
    let runs: Vec<(&str, Box<dyn Fn() -> String>)> = vec![
        (
            "h-conv",
            Box::new(|| {
                run_h_convergence(&HConvergenceConfig::default(), &TableSource::in_memory()).unwrap().output.csv
            }),
        ),
        (
            "c-conv",
            Box::new(|| {
                run_c_convergence(&CConvergenceConfig::default(), &TableSource::in_memory()).unwrap().output.csv
            }),
        ),
        ("noise", Box::new(|| run_noise_floor(&NoiseConfig::default(), &TableSource::in_memory()).unwrap().output.csv)),
        (
            "jitter",
            Box::new(|| run_jitter_study(&JitterConfig::default(), &TableSource::in_memory()).unwrap().output.csv),
        ),
        (
            "conditioning",
            Box::new(|| {
                run_conditioning_study(&ConditioningConfig::default(), &TableSource::in_memory()).unwrap().output.csv
            }),
        ),
    ];
    let differing: Vec<&str> = runs.iter().filter(|(_, f)| f() != f()).map(|(name, _)| *name).collect();
    outcome(differing.is_empty(), format!("byte-identical reruns for all 5 studies; differing: {differing:?}"))
}

fn main() {
    let criteria: Vec<(&str, fn() -> Outcome, Option<Duration>)> = vec![
        ("tau reproduction", criterion_1, Some(Duration::from_secs(1))),
        ("truncation guarantee", criterion_2, Some(Duration::from_secs(10))),
        ("cardinal delta property", criterion_3, Some(Duration::from_secs(30))),
        ("frequency partition of unity", criterion_4, None),
        ("poisson closed form vs bessel branch", criterion_5, None),
        ("h-rate", criterion_6, Some(Duration::from_secs(120))),
        ("c-rate", criterion_7, Some(Duration::from_secs(120))),
        ("noise floor", criterion_8, Some(Duration::from_secs(120))),
        ("conditioning ordering", criterion_9, Some(Duration::from_secs(120))),
        ("frame-bound arithmetic", criterion_10, None),
        ("scaled-interpolant identity", criterion_11, None),
        ("determinism", criterion_12, None),
    ];
    let mut failed = Vec::new();
    for (i, (name, check, limit)) in criteria.into_iter().enumerate() {
        let start = Instant::now();
        let result = std::panic::catch_unwind(check);
        let elapsed = start.elapsed();
        let mut o = result.unwrap_or_else(|_| outcome(false, "panicked"));
        if let Some(limit) = limit {
            if elapsed > limit {
                o.pass = false;
                o.detail.push_str(&format!("; runtime {elapsed:?} exceeds {limit:?}"));
            }
        }
        let verdict = if o.pass { "PASS" } else { "FAIL" };
        println!("criterion {:>2} {verdict} {name}: {} [{:.2?}]", i + 1, o.detail, elapsed);
        if !o.pass {
            failed.push(i + 1);
        }
    }
    if failed.is_empty() {
        println!("acceptance: all 12 criteria pass");
    } else {
        println!("acceptance: failing criteria {failed:?}");
        std::process::exit(1);
    }
}
