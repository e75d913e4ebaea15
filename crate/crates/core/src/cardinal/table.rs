use super::plan::{cardinal_hat, compute_tau, ln_periodized_symbol, TruncationPlan};
use crate::error::{domain, Error, Result};
use crate::kernels::{Kernel, KernelFamily};
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::Serialize;
use sha2::{Digest, Sha256};
use std::f64::consts::PI;
use std::fs;
use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};

const IMAG_TOLERANCE: f64 = 1e-10;
const GRID_SNAP: f64 = 1e-9;
const SPACE_PERIOD_FACTOR: usize = 8;
const HEADER_TAG: &str = "cardinal-table";
const FORMAT_VERSION: &str = "v1";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TableOptions {
    /// Number of table points in the off-grid Lagrange stencil (2, 4, 6 or 8).
    pub interp_order: usize,
    /// Largest transform length before giving up.
    pub max_dft_len: usize,
}

impl Default for TableOptions {
    fn default() -> Self {
        TableOptions { interp_order: 6, max_dft_len: 1 << 24 }
    }
}

/// Construction details, kept for reporting only.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TableDiagnostics {
    pub tau: usize,
    pub bandwidth: f64,
    pub internal_oversample: usize,
    pub dft_len: usize,
    pub max_imag: f64,
}

/// Samples of the cardinal function at x = i/M, |x| ≤ N.
#[derive(Debug, Clone, PartialEq)]
pub struct CardinalTable {
    kernel: Kernel,
    half_width: usize,
    oversample: usize,
    epsilon: f64,
    interp_order: usize,
    values: Vec<f64>,
    diagnostics: Option<TableDiagnostics>,
}

pub fn build_cardinal_table(kernel: &Kernel, epsilon: f64, n: usize, m: usize) -> Result<CardinalTable> {
    build_cardinal_table_with(kernel, epsilon, n, m, TableOptions::default())
}

fn check_order(order: usize) -> Result<()> {
    if matches!(order, 2 | 4 | 6 | 8) {
        Ok(())
    } else {
        Err(domain(format!("interpolation order must be 2, 4, 6 or 8, got {order}")))
    }
}

fn next_smooth_len(min: usize) -> usize {
    let mut n = min.max(1);
    loop {
        let mut r = n;
        for p in [2, 3, 5] {
            while r.is_multiple_of(p) {
                r /= p;
            }
        }
        if r == 1 {
            return n;
        }
        n += 1;
    }
}

/// Smallest ξ ≥ π beyond which φ̂(ξ)/min S stays below `ratio`.
fn bandwidth(plan: &TruncationPlan, ratio: f64) -> Result<f64> {
    let mut ln_s_min = f64::INFINITY;
    for i in 0..=64 {
        let xi = PI * i as f64 / 64.0;
        match ln_periodized_symbol(plan, xi) {
            Ok(v) => ln_s_min = ln_s_min.min(v),
            Err(Error::Singularity(_)) => {}
            Err(e) => return Err(e),
        }
    }
    let target = ratio.ln() + ln_s_min;
    let step = 0.125;
    let mut xi = PI;
    while plan.kernel.ln_fourier(xi)? >= target {
        xi += step;
        if xi > 1e7 {
            return Err(Error::Bandwidth("cardinal transform does not decay".into()));
        }
    }
    Ok(xi)
}

pub fn build_cardinal_table_with(
    kernel: &Kernel,
    epsilon: f64,
    n: usize,
    m: usize,
    opts: TableOptions,
) -> Result<CardinalTable> {
    if n < 4 || m < 4 {
        return Err(domain(format!("table requires N >= 4 and M >= 4, got N = {n}, M = {m}")));
    }
    check_order(opts.interp_order)?;
    let plan = compute_tau(kernel, epsilon)?;
    let band = bandwidth(&plan, epsilon * 1e-2)?;
    let stride = ((band / (PI * m as f64)).ceil() as usize).max(1);
    let m_int = stride * m;
    let len = next_smooth_len(SPACE_PERIOD_FACTOR * 2 * n * m_int);
    if len > opts.max_dft_len {
        return Err(Error::Bandwidth(format!(
            "transform length {len} exceeds the limit {}; the cardinal transform needs |xi| up to {band:.3}, \
             try a larger epsilon or a smaller N",
            opts.max_dft_len
        )));
    }
    let dxi = 2.0 * PI * m_int as f64 / len as f64;
    let mut buf = vec![Complex::new(0.0, 0.0); len];
    for i in 0..=len / 2 {
        let v = cardinal_hat(&plan, i as f64 * dxi)?;
        buf[i] = Complex::new(v, 0.0);
        if i > 0 && i < len - i {
            buf[len - i] = Complex::new(v, 0.0);
        }
    }
    let mut planner = FftPlanner::<f64>::new();
    planner.plan_fft_inverse(len).process(&mut buf);
    let scale = m_int as f64 / len as f64;

    let count = 2 * n * m + 1;
    let center = (n * m) as i64;
    let mut values = Vec::with_capacity(count);
    let mut max_imag: f64 = 0.0;
    for i in 0..count as i64 {
        let j = (i - center) * stride as i64;
        let z = buf[j.rem_euclid(len as i64) as usize] * scale;
        max_imag = max_imag.max(z.im.abs());
        values.push(z.re);
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::NumericalConsistency("non-finite cardinal table values".into()));
    }
    if !(max_imag <= IMAG_TOLERANCE) {
        return Err(Error::NumericalConsistency(format!("imaginary residue {max_imag:e} exceeds {IMAG_TOLERANCE:e}")));
    }
    for i in 0..count / 2 {
        let avg = 0.5 * (values[i] + values[count - 1 - i]);
        values[i] = avg;
        values[count - 1 - i] = avg;
    }
    Ok(CardinalTable {
        kernel: *kernel,
        half_width: n,
        oversample: m,
        epsilon,
        interp_order: opts.interp_order,
        values,
        diagnostics: Some(TableDiagnostics {
            tau: plan.tau,
            bandwidth: band,
            internal_oversample: m_int,
            dft_len: len,
            max_imag,
        }),
    })
}

impl CardinalTable {
    pub fn kernel(&self) -> &Kernel {
        &self.kernel
    }

    pub fn half_width(&self) -> usize {
        self.half_width
    }

    pub fn oversample(&self) -> usize {
        self.oversample
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn interp_order(&self) -> usize {
        self.interp_order
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn diagnostics(&self) -> Option<&TableDiagnostics> {
        self.diagnostics.as_ref()
    }

    /// Same samples with a different off-grid rule.
    pub fn with_interp_order(mut self, order: usize) -> Result<Self> {
        check_order(order)?;
        self.interp_order = order;
        Ok(self)
    }

    /// Table value at grid index i (x = i/M).
    pub fn at_index(&self, i: i64) -> Option<f64> {
        let k = i + (self.half_width * self.oversample) as i64;
        if k < 0 {
            return None;
        }
        self.values.get(k as usize).copied()
    }

    /// max_{|j| ≤ N} |L(j) − δ_{0j}|.
    pub fn delta_residual(&self) -> f64 {
        let m = self.oversample as i64;
        let n = self.half_width as i64;
        (-n..=n)
            .map(|j| {
                let want = if j == 0 { 1.0 } else { 0.0 };
                (self.at_index(j * m).unwrap() - want).abs()
            })
            .fold(0.0, |acc: f64, v| if v.is_nan() || acc.is_nan() { f64::NAN } else { acc.max(v) })
    }

    /// L(x) by local Lagrange interpolation, |x| ≤ N.
    pub fn eval(&self, x: f64) -> Result<f64> {
        let n = self.half_width as f64;
        if !x.is_finite() || x.abs() > n * (1.0 + 1e-12) {
            return Err(Error::OutOfRange(format!("|x| = {} exceeds table half-width {n}", x.abs())));
        }
        Ok(self.eval_unchecked(x.clamp(-n, n)))
    }

    /// L(x) for |x| ≤ N without the range check; callers guarantee coverage.
    pub(crate) fn eval_unchecked(&self, x: f64) -> f64 {
        let u = (x + self.half_width as f64) * self.oversample as f64;
        let nearest = u.round();
        if (u - nearest).abs() <= GRID_SNAP {
            return self.values[nearest as usize];
        }
        let q = self.interp_order;
        let last = self.values.len() - 1;
        let base = u.floor() as usize;
        let start = (base + 1).saturating_sub(q / 2).min(last + 1 - q);
        let mut acc = 0.0;
        for k in 0..q {
            let pk = (start + k) as f64;
            let mut w = 1.0;
            for l in 0..q {
                if l != k {
                    let pl = (start + l) as f64;
                    w *= (u - pl) / (pk - pl);
                }
            }
            acc += w * self.values[start + k];
        }
        acc
    }

    fn header(&self) -> String {
        header_line(&self.kernel, self.epsilon, self.half_width, self.oversample, self.interp_order)
    }

    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "{}", self.header())?;
        for v in &self.values {
            writeln!(w, "{v:.16e}")?;
        }
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let mut out = Vec::new();
        self.write_to(&mut out).expect("writing to memory");
        String::from_utf8(out).expect("ascii output")
    }

    pub fn read_from<R: BufRead>(r: R) -> Result<Self> {
        let mut lines = r.lines();
        let header = lines.next().ok_or_else(|| Error::Parse { line: 1, message: "empty table file".into() })??;
        let perr = |message: String| Error::Parse { line: 1, message };
        let tokens: Vec<&str> = header.split_whitespace().collect();
        if tokens.len() != 9 || tokens[0] != HEADER_TAG || tokens[1] != FORMAT_VERSION {
            return Err(perr(format!(
                "expected '{HEADER_TAG} {FORMAT_VERSION} family alpha c epsilon N M interp_order'"
            )));
        }
        let num = |s: &str| s.parse::<f64>().map_err(|e| perr(format!("bad number '{s}': {e}")));
        let int = |s: &str| s.parse::<usize>().map_err(|e| perr(format!("bad integer '{s}': {e}")));
        let family = KernelFamily::parse(tokens[2]).map_err(|e| perr(e.to_string()))?;
        let alpha = if tokens[3] == "none" { None } else { Some(num(tokens[3])?) };
        let kernel = Kernel::new(family, alpha, num(tokens[4])?).map_err(|e| perr(e.to_string()))?;
        let epsilon = num(tokens[5])?;
        let (n, m, order) = (int(tokens[6])?, int(tokens[7])?, int(tokens[8])?);
        check_order(order).map_err(|e| perr(e.to_string()))?;
        if n == 0 || m == 0 {
            return Err(perr("N and M must be positive".into()));
        }
        let expected = 2 * n * m + 1;
        let mut values = Vec::with_capacity(expected);
        for (i, line) in lines.enumerate() {
            let line = line?;
            let t = line.trim();
            if t.is_empty() {
                continue;
            }
            let v =
                t.parse::<f64>().map_err(|e| Error::Parse { line: i + 2, message: format!("bad value '{t}': {e}") })?;
            values.push(v);
        }
        if values.len() != expected {
            return Err(Error::Parse {
                line: values.len() + 2,
                message: format!("expected {expected} values, found {}", values.len()),
            });
        }
        Ok(CardinalTable {
            kernel,
            half_width: n,
            oversample: m,
            epsilon,
            interp_order: order,
            values,
            diagnostics: None,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let file = fs::File::create(path)?;
        let mut w = std::io::BufWriter::new(file);
        self.write_to(&mut w)?;
        w.flush()?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file = fs::File::open(path)?;
        Self::read_from(std::io::BufReader::new(file))
    }

    /// Hex digest of the parameters that determine the table.
    pub fn cache_key(kernel: &Kernel, epsilon: f64, n: usize, m: usize, interp_order: usize) -> String {
        let digest = Sha256::digest(header_line(kernel, epsilon, n, m, interp_order).as_bytes());
        hex::encode(&digest[..16])
    }

    pub fn cache_path(dir: &Path, kernel: &Kernel, epsilon: f64, n: usize, m: usize, interp_order: usize) -> PathBuf {
        dir.join(format!("table-{}.txt", Self::cache_key(kernel, epsilon, n, m, interp_order)))
    }

    /// Loads a table from `dir` if present, otherwise builds and stores it.
    /// The flag reports whether the cache was hit.
    pub fn cached(
        dir: &Path,
        kernel: &Kernel,
        epsilon: f64,
        n: usize,
        m: usize,
        opts: TableOptions,
    ) -> Result<(Self, bool)> {
        let path = Self::cache_path(dir, kernel, epsilon, n, m, opts.interp_order);
        if path.exists() {
            let table = Self::load(&path)?;
            if table.kernel.approx_eq(kernel, 0.0) && table.half_width == n && table.oversample == m {
                return Ok((table, true));
            }
            log::warn!("cache entry {} does not match its key; rebuilding", path.display());
        }
        let table = build_cardinal_table_with(kernel, epsilon, n, m, opts)?;
        fs::create_dir_all(dir)?;
        let tmp = path.with_extension("tmp");
        table.save(&tmp)?;
        fs::rename(&tmp, &path)?;
        Ok((table, false))
    }
}

fn header_line(kernel: &Kernel, epsilon: f64, n: usize, m: usize, interp_order: usize) -> String {
    let alpha = kernel.alpha().map_or_else(|| "none".to_string(), |a| format!("{a:e}"));
    format!(
        "{HEADER_TAG} {FORMAT_VERSION} {} {alpha} {:e} {epsilon:e} {n} {m} {interp_order}",
        kernel.family(),
        kernel.shape()
    )
}
