use super::samples::SampleSet;
use crate::cardinal::CardinalTable;
use crate::error::{Error, Result};
use crate::kernels::Kernel;
use std::sync::Arc;

/// I f(x) = Σ_{|j|≤N} f(j/N) L(Nx − j), where L is the cardinal function of the
/// kernel dilated to spacing 1/N.
#[derive(Debug, Clone)]
pub struct UniformInterpolant {
    level: usize,
    coeffs: Vec<f64>,
    kernel: Kernel,
    table: Arc<CardinalTable>,
}

pub fn fit_uniform(samples: &SampleSet, kernel: &Kernel, table: Arc<CardinalTable>) -> Result<UniformInterpolant> {
    let n = samples
        .uniform_level()
        .ok_or_else(|| Error::GridMismatch(format!("{} nodes are not of the form j/N, |j| <= N", samples.len())))?;
    let expected = kernel.dilated(n as f64);
    if !table.kernel().approx_eq(&expected, 1e-12) {
        return Err(Error::KernelMismatch(format!("level {n} needs a table for {expected}, got {}", table.kernel())));
    }
    if table.half_width() < 2 * n {
        return Err(Error::Coverage(format!("table half-width {} is below 2N = {}", table.half_width(), 2 * n)));
    }
    Ok(UniformInterpolant { level: n, coeffs: samples.values().to_vec(), kernel: *kernel, table })
}

/// Σ_j c_j L(u − j) over j = first, first+1, …, dropping terms outside the table.
fn cardinal_series(table: &CardinalTable, coeffs: &[f64], first: i64, u: f64) -> f64 {
    let h = table.half_width() as f64;
    let mut acc = 0.0;
    for (k, &c) in coeffs.iter().enumerate() {
        let t = u - (first + k as i64) as f64;
        if t.abs() <= h {
            acc += c * table.eval_unchecked(t);
        }
    }
    acc
}

impl UniformInterpolant {
    pub fn level(&self) -> usize {
        self.level
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn kernel(&self) -> &Kernel {
        &self.kernel
    }

    pub fn table(&self) -> &CardinalTable {
        &self.table
    }

    pub fn eval(&self, x: f64) -> f64 {
        let n = self.level as i64;
        cardinal_series(&self.table, &self.coeffs, -n, n as f64 * x)
    }

    /// Evaluates through the rescaling identity I^{hX} f(x) = h^{−1} I_{1/h} f^h(x/h)
    /// with f^h = h f(h ·): the unit-scale series of the rescaled data, divided by h.
    pub fn scaled_eval(&self, x: f64) -> f64 {
        let n = self.level as i64;
        let h = 1.0 / self.level as f64;
        let rescaled: Vec<f64> = self.coeffs.iter().map(|c| h * c).collect();
        cardinal_series(&self.table, &rescaled, -n, x / h) / h
    }

    /// Bound on the dropped part of the series near |x| = half-width/N:
    /// Σ|c_j| times the largest table magnitude over its outermost unit interval.
    pub fn coverage_tail(&self) -> f64 {
        let values = self.table.values();
        let m = self.table.oversample();
        let edge = values[..=m].iter().map(|v| v.abs()).fold(0.0, f64::max);
        edge * self.coeffs.iter().map(|c| c.abs()).sum::<f64>()
    }
}
