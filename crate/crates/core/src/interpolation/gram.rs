use super::samples::SampleSet;
use crate::error::{domain, Error, Result};
use crate::kernels::{Kernel, KernelFamily};
use crate::linalg::{extreme_eigenvalues, matvec, norm2, symmetric_from_fn, SymmetricFactor};
use faer::Mat;

const CONDITION_NODE_LIMIT: usize = 2048;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GramOptions {
    pub max_nodes: usize,
    /// Largest accepted ‖M a − y‖₂ / ‖y‖₂.
    pub residual_tol: f64,
    pub cond_iterations: usize,
    pub cond_stagnation: f64,
}

impl Default for GramOptions {
    fn default() -> Self {
        GramOptions { max_nodes: 4096, residual_tol: 1e-8, cond_iterations: 50, cond_stagnation: 1e-3 }
    }
}

/// Σ_j a_j φ(x − x_j) with M a = y.
#[derive(Debug, Clone)]
pub struct GramInterpolant {
    nodes: Vec<f64>,
    coeffs: Vec<f64>,
    kernel: Kernel,
    cond_estimate: f64,
    residual: f64,
}

fn check_kernel(kernel: &Kernel) -> Result<()> {
    if kernel.family() == KernelFamily::Multiquadric {
        let a = kernel.alpha().unwrap_or(0.0);
        if a >= -0.5 {
            return Err(Error::Unsupported(format!(
                "Gram interpolation needs alpha < -1/2 for unique solvability, got {a}"
            )));
        }
    }
    Ok(())
}

fn gram_matrix(nodes: &[f64], kernel: &Kernel) -> Mat<f64> {
    symmetric_from_fn(nodes.len(), |i, j| kernel.spatial(nodes[i] - nodes[j]))
}

fn start_vector(nodes: &[f64]) -> Vec<f64> {
    nodes.iter().map(|&x| 1.0 + 0.5 * (1.7 * x + 0.3).sin()).collect()
}

fn condition_from(m: &Mat<f64>, factor: &SymmetricFactor, nodes: &[f64], opts: &GramOptions) -> f64 {
    let n = nodes.len();
    if n == 1 {
        return 1.0;
    }
    let (hi, lo) = extreme_eigenvalues(m, factor, &start_vector(nodes), opts.cond_iterations, opts.cond_stagnation);
    let cond = hi / lo;
    if !(hi.is_finite() && lo.is_finite()) || lo <= 0.0 || !cond.is_finite() || cond > 1.0 / (n as f64 * f64::EPSILON) {
        f64::INFINITY
    } else {
        cond
    }
}

pub fn fit_gram(samples: &SampleSet, kernel: &Kernel) -> Result<GramInterpolant> {
    fit_gram_with(samples, kernel, GramOptions::default())
}

pub fn fit_gram_with(samples: &SampleSet, kernel: &Kernel, opts: GramOptions) -> Result<GramInterpolant> {
    check_kernel(kernel)?;
    let n = samples.len();
    if n > opts.max_nodes {
        return Err(domain(format!("{n} nodes exceed the limit of {}", opts.max_nodes)));
    }
    let nodes = samples.nodes().to_vec();
    let y = samples.values();
    let m = gram_matrix(&nodes, kernel);
    let factor = SymmetricFactor::new(&m);
    let mut a = factor.solve(y);
    let residual_of = |a: &[f64]| -> Vec<f64> { matvec(&m, a).iter().zip(y).map(|(ma, yi)| yi - ma).collect() };
    let r = residual_of(&a);
    let correction = factor.solve(&r);
    for (ai, di) in a.iter_mut().zip(&correction) {
        *ai += di;
    }
    let y_norm = norm2(y);
    let res_norm = norm2(&residual_of(&a));
    let relative = if y_norm > 0.0 { res_norm / y_norm } else { res_norm };
    let cond = condition_from(&m, &factor, &nodes, &opts);
    if !a.iter().all(|v| v.is_finite()) || !(relative <= opts.residual_tol) {
        return Err(Error::IllConditioned { cond, residual: relative });
    }
    Ok(GramInterpolant { nodes, coeffs: a, kernel: *kernel, cond_estimate: cond, residual: relative })
}

/// 2-norm condition estimate of the Gram matrix; +∞ when it is singular to
/// working precision.
pub fn gram_condition(nodes: &[f64], kernel: &Kernel) -> Result<f64> {
    let n = nodes.len();
    if n == 0 || n > CONDITION_NODE_LIMIT {
        return Err(domain(format!("condition estimate needs 1..={CONDITION_NODE_LIMIT} nodes, got {n}")));
    }
    let mut sorted = nodes.to_vec();
    sorted.sort_by(f64::total_cmp);
    if !sorted.iter().all(|v| v.is_finite()) || sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err(domain("nodes must be finite and distinct"));
    }
    let m = gram_matrix(nodes, kernel);
    let factor = SymmetricFactor::new(&m);
    Ok(condition_from(&m, &factor, nodes, &GramOptions::default()))
}

impl GramInterpolant {
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn kernel(&self) -> &Kernel {
        &self.kernel
    }

    pub fn cond_estimate(&self) -> f64 {
        self.cond_estimate
    }

    /// ‖M a − y‖₂ / ‖y‖₂ after refinement.
    pub fn relative_residual(&self) -> f64 {
        self.residual
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.nodes.iter().zip(&self.coeffs).map(|(xj, aj)| aj * self.kernel.spatial(x - xj)).sum()
    }
}
