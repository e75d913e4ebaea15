//! Dense symmetric matrices: Bunch–Kaufman factorization and extreme-eigenvalue
//! estimates by power and inverse iteration.

use faer::linalg::solvers::Lblt;
use faer::prelude::*;
use faer::{Mat, Side};

pub(crate) fn symmetric_from_fn(n: usize, f: impl Fn(usize, usize) -> f64) -> Mat<f64> {
    let mut m = Mat::<f64>::zeros(n, n);
    for j in 0..n {
        for i in j..n {
            let v = f(i, j);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    m
}

pub(crate) fn matvec(m: &Mat<f64>, x: &[f64]) -> Vec<f64> {
    let n = m.nrows();
    let mut out = vec![0.0; n];
    for j in 0..n {
        let xj = x[j];
        let col = m.col(j);
        for i in 0..n {
            out[i] += col[i] * xj;
        }
    }
    out
}

pub(crate) fn norm2(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) struct SymmetricFactor {
    lblt: Lblt<f64>,
    n: usize,
}

impl SymmetricFactor {
    pub(crate) fn new(m: &Mat<f64>) -> Self {
        SymmetricFactor { lblt: m.lblt(Side::Lower), n: m.nrows() }
    }

    /// Solution of M x = b; entries may be non-finite for singular M.
    pub(crate) fn solve(&self, b: &[f64]) -> Vec<f64> {
        let rhs = Col::<f64>::from_fn(self.n, |i| b[i]);
        let x = self.lblt.solve(&rhs);
        (0..self.n).map(|i| x[i]).collect()
    }
}

/// Estimates of the largest and smallest eigenvalue of a symmetric matrix.
/// Each iteration stops after `max_iter` steps or when the Rayleigh quotient
/// changes by less than `stagnation` relative.
pub(crate) fn extreme_eigenvalues(
    m: &Mat<f64>,
    factor: &SymmetricFactor,
    start: &[f64],
    max_iter: usize,
    stagnation: f64,
) -> (f64, f64) {
    let normalize = |v: &[f64]| -> Option<Vec<f64>> {
        let s = norm2(v);
        (s.is_finite() && s > 0.0).then(|| v.iter().map(|x| x / s).collect())
    };
    let iterate = |apply: &dyn Fn(&[f64]) -> Vec<f64>| -> f64 {
        let Some(mut v) = normalize(start) else { return f64::NAN };
        let mut prev = f64::NAN;
        for _ in 0..max_iter.max(1) {
            let w = apply(&v);
            let mu = dot(&v, &w);
            if !mu.is_finite() {
                return f64::NAN;
            }
            let done = (mu - prev).abs() <= stagnation * mu.abs();
            prev = mu;
            match normalize(&w) {
                Some(next) => v = next,
                None => return mu,
            }
            if done {
                break;
            }
        }
        prev
    };
    let largest = iterate(&|v| matvec(m, v));
    let inverse = iterate(&|v| factor.solve(v));
    (largest, 1.0 / inverse)
}
