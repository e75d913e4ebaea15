use super::functions::TestFunction;
use super::norms::{error_norms, ErrorReport};
use super::rate::{fit_log_errors, RateFit};
use crate::cardinal::{build_cardinal_table_with, CardinalTable, TableOptions};
use crate::error::{domain, Error, Result};
use crate::interpolation::{fit_gram, fit_uniform, gram_condition, SampleSet, UniformInterpolant};
use crate::kernels::{Kernel, KernelFamily, KernelSpec};
use crate::sampling::{
    apply_jitter, apply_noise, estimate_frame_bounds, kadec_margin, JitterPattern, JitterSpec, NodeSequence,
    NoiseDistribution, NoiseSpec,
};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};
use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

const FIT_FLOOR: f64 = 1e-13;
const MAX_LEVEL: usize = 2048;

/// Where studies obtain cardinal tables: built in memory, or through a cache directory.
#[derive(Debug, Clone, Default)]
pub struct TableSource {
    cache: Option<PathBuf>,
    options: TableOptions,
}

impl TableSource {
    pub fn in_memory() -> Self {
        TableSource::default()
    }

    pub fn with_cache(dir: impl Into<PathBuf>) -> Self {
        TableSource { cache: Some(dir.into()), options: TableOptions::default() }
    }

    pub fn with_options(self, options: TableOptions) -> Self {
        TableSource { options, ..self }
    }

    pub fn get(&self, kernel: &Kernel, epsilon: f64, n: usize, m: usize) -> Result<Arc<CardinalTable>> {
        let table = match &self.cache {
            Some(dir) => CardinalTable::cached(dir, kernel, epsilon, n, m, self.options)?.0,
            None => build_cardinal_table_with(kernel, epsilon, n, m, self.options)?,
        };
        Ok(Arc::new(table))
    }
}

/// One named acceptance check inside a study summary.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub bound: String,
    pub pass: bool,
}

impl Check {
    fn new(name: impl Into<String>, value: f64, bound: impl Into<String>, pass: bool) -> Self {
        Check { name: name.into(), value, bound: bound.into(), pass }
    }
}

/// The CSV and JSON artifacts of a study run.
#[derive(Debug, Clone)]
pub struct StudyOutput {
    pub study: &'static str,
    pub kernel_tag: String,
    pub config_tag: String,
    pub csv: String,
    pub summary: Value,
    pub passed: bool,
}

impl StudyOutput {
    pub fn file_stem(&self) -> String {
        format!("{}-{}-{}", self.study, self.kernel_tag, self.config_tag)
    }

    /// Writes `<stem>.csv` and `<stem>.json` into `dir`.
    pub fn write(&self, dir: &Path) -> Result<(PathBuf, PathBuf)> {
        fs::create_dir_all(dir)?;
        let stem = self.file_stem();
        let csv = dir.join(format!("{stem}.csv"));
        let js = dir.join(format!("{stem}.json"));
        fs::write(&csv, &self.csv)?;
        let text = serde_json::to_string_pretty(&self.summary).map_err(|e| Error::Config(e.to_string()))?;
        fs::write(&js, text + "\n")?;
        Ok((csv, js))
    }
}

struct CsvWriter {
    text: String,
}

impl CsvWriter {
    fn new(config: &Value, columns: &[&str]) -> Self {
        let mut text = format!("# config: {config}\n");
        text.push_str(&columns.join(","));
        text.push('\n');
        CsvWriter { text }
    }

    fn row(&mut self, cells: &[String]) {
        self.text.push_str(&cells.join(","));
        self.text.push('\n');
    }
}

fn num(v: f64) -> String {
    format!("{v:e}")
}

fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

fn config_tag(config: &Value) -> String {
    let digest = Sha256::digest(config.to_string().as_bytes());
    hex::encode(&digest[..4])
}

fn finish(
    study: &'static str,
    kernels: &[Kernel],
    config: Value,
    csv: CsvWriter,
    checks: &[Check],
    extra: Value,
) -> StudyOutput {
    let passed = checks.iter().all(|c| c.pass);
    let names: Vec<String> = kernels.iter().map(Kernel::to_string).collect();
    let kernel_tag = match kernels {
        [k] => k.tag(),
        _ => "multi".to_string(),
    };
    let mut summary = json!({
        "study": study,
        "kernel": names.join(" "),
        "config": config,
        "checks": checks,
        "pass": passed,
    });
    if let (Value::Object(map), Value::Object(more)) = (&mut summary, extra) {
        map.extend(more);
    }
    StudyOutput { study, kernel_tag, config_tag: config_tag(&summary["config"]), csv: csv.text, summary, passed }
}

fn to_value<T: Serialize>(cfg: &T) -> Value {
    serde_json::to_value(cfg).expect("study configs serialize")
}

fn check_grid(name: &str, grid: &[usize]) -> Result<()> {
    if grid.is_empty() || grid.windows(2).any(|w| w[1] <= w[0]) || grid[0] == 0 {
        return Err(domain(format!("{name} must be a nonempty increasing list of positive levels")));
    }
    if *grid.last().unwrap() > MAX_LEVEL {
        return Err(domain(format!("{name} exceeds the largest supported level {MAX_LEVEL}")));
    }
    Ok(())
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(domain(format!("{name} must be positive, got {v}")))
    }
}

/// Cardinal interpolant of `values` at nodes j/n, |j| ≤ n, with a table wide
/// enough to evaluate on [−window, window].
fn cardinal_path(
    base: &Kernel,
    n: usize,
    values: Vec<f64>,
    window: f64,
    epsilon: f64,
    oversample: usize,
    tables: &TableSource,
) -> Result<UniformInterpolant> {
    let half_width = (((window + 1.0) * n as f64).ceil() as usize).max(2 * n);
    let table = tables.get(&base.dilated(n as f64), epsilon, half_width, oversample)?;
    let nodes = (-(n as i64)..=n as i64).map(|j| j as f64 / n as f64).collect();
    fit_uniform(&SampleSet::new(nodes, values)?, base, table)
}

fn lattice_values(f: &TestFunction, n: usize) -> Vec<f64> {
    (-(n as i64)..=n as i64).map(|j| f.eval(j as f64 / n as f64)).collect()
}

fn default_kernel() -> KernelSpec {
    KernelSpec { family: KernelFamily::Poisson, alpha: None, c: Some(1.0), lambda: None }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HConvergenceConfig {
    pub degree: usize,
    pub amplitude: f64,
    pub n_grid: Vec<usize>,
    pub kernel: KernelSpec,
    pub epsilon: f64,
    pub oversample: usize,
    pub window: f64,
    /// Quadrature points per node spacing.
    pub resolution: usize,
    pub slope_tolerance: f64,
}

impl Default for HConvergenceConfig {
    fn default() -> Self {
        HConvergenceConfig {
            degree: 3,
            amplitude: 1.0,
            n_grid: vec![8, 16, 32, 64],
            kernel: default_kernel(),
            epsilon: 1e-12,
            oversample: 16,
            window: 4.0,
            resolution: 8,
            slope_tolerance: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HRow {
    pub n: usize,
    pub report: ErrorReport,
    /// error / (h^p |f|_{W₂ᵖ})
    pub scaled: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct HConvergence {
    pub rows: Vec<HRow>,
    pub fit: Option<RateFit>,
    pub checks: Vec<Check>,
    pub output: StudyOutput,
}

struct Lattice<'a> {
    kernel: Kernel,
    epsilon: f64,
    oversample: usize,
    window: f64,
    resolution: usize,
    tables: &'a TableSource,
}

impl Lattice<'_> {
    /// Errors of the level-N cardinal interpolant of f for each N, with the
    /// noise seed offset by N.
    fn errors(&self, f: &TestFunction, n_grid: &[usize], noise: Option<&NoiseSpec>) -> Result<Vec<ErrorReport>> {
        n_grid
            .iter()
            .map(|&n| {
                let mut values = lattice_values(f, n);
                if let Some(spec) = noise {
                    let spec = NoiseSpec { seed: spec.seed.wrapping_add(n as u64), ..*spec };
                    values = apply_noise(&values, &spec)?;
                }
                let interp =
                    cardinal_path(&self.kernel, n, values, self.window, self.epsilon, self.oversample, self.tables)?;
                error_norms(f, |x| interp.eval(x), self.window, 1.0 / (self.resolution * n) as f64)
            })
            .collect()
    }
}

pub fn run_h_convergence(cfg: &HConvergenceConfig, tables: &TableSource) -> Result<HConvergence> {
    check_grid("n_grid", &cfg.n_grid)?;
    check_positive("window", cfg.window)?;
    if cfg.resolution == 0 {
        return Err(domain("resolution must be positive"));
    }
    let f = TestFunction::bspline(cfg.degree)?.scaled(cfg.amplitude);
    let kernel = cfg.kernel.to_kernel()?;
    let lattice = Lattice {
        kernel,
        epsilon: cfg.epsilon,
        oversample: cfg.oversample,
        window: cfg.window,
        resolution: cfg.resolution,
        tables,
    };
    let reports = lattice.errors(&f, &cfg.n_grid, None)?;
    let seminorm = f.seminorm().filter(|s| *s > 0.0);
    let rows: Vec<HRow> = cfg
        .n_grid
        .iter()
        .zip(&reports)
        .map(|(&n, r)| HRow {
            n,
            report: *r,
            scaled: seminorm.map(|s| r.l2_window / ((n as f64).powi(-(cfg.degree as i32)) * s)),
        })
        .collect();
    let xs: Vec<f64> = cfg.n_grid.iter().map(|&n| (1.0 / n as f64).ln()).collect();
    let errs: Vec<f64> = reports.iter().map(|r| r.l2_window).collect();
    let fit = fit_log_errors(&xs, &errs, FIT_FLOOR).ok();

    let p = cfg.degree as f64;
    let mut checks = vec![match &fit {
        Some(fit) => Check::new(
            "slope",
            fit.slope,
            format!("[{}, {}]", p - cfg.slope_tolerance, p + cfg.slope_tolerance),
            (fit.slope - p).abs() <= cfg.slope_tolerance,
        ),
        None => Check::new("slope", f64::NAN, "at least 4 errors above 1e-13", false),
    }];
    let worst = reports.iter().map(|r| r.self_check).fold(0.0, f64::max);
    checks.push(Check::new("quadrature self-check", worst, "< 0.05", reports.iter().all(|r| r.self_check_ok)));

    let config = to_value(cfg);
    let mut csv =
        CsvWriter::new(&config, &["N", "h", "l2_error", "sup_error", "self_check", "tail_estimate", "scaled_error"]);
    for row in &rows {
        let r = &row.report;
        csv.row(&[
            row.n.to_string(),
            num(1.0 / row.n as f64),
            num(r.l2_window),
            num(r.sup_window),
            num(r.self_check),
            opt(r.tail_estimate),
            opt(row.scaled),
        ]);
    }
    let extra = json!({
        "slope": fit.as_ref().map(|f| f.slope),
        "r_squared": fit.as_ref().map(|f| f.r_squared),
        "seminorm": seminorm,
    });
    let output = finish("h-conv", &[kernel], config, csv, &checks, extra);
    Ok(HConvergence { rows, fit, checks, output })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CConvergenceConfig {
    pub sigma: f64,
    pub amplitude: f64,
    pub c_grid: Vec<f64>,
    pub family: KernelFamily,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    /// Samples are taken at the integers j with |j| ≤ section.
    pub section: usize,
    pub window: f64,
    pub epsilon: f64,
    pub oversample: usize,
    /// Quadrature points per unit length.
    pub resolution: usize,
    pub underflow: f64,
    pub slope_factor: f64,
}

impl Default for CConvergenceConfig {
    fn default() -> Self {
        CConvergenceConfig {
            sigma: PI / 2.0,
            amplitude: 1.0,
            c_grid: vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0],
            family: KernelFamily::Poisson,
            alpha: None,
            section: 256,
            window: 32.0,
            epsilon: 1e-12,
            oversample: 16,
            resolution: 8,
            underflow: 1e-14,
            slope_factor: 0.8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CRow {
    pub c: f64,
    pub report: ErrorReport,
    pub used_in_fit: bool,
}

#[derive(Debug, Clone)]
pub struct CConvergence {
    pub rows: Vec<CRow>,
    pub fit: Option<RateFit>,
    pub truncated_at: Option<f64>,
    pub checks: Vec<Check>,
    pub output: StudyOutput,
}

pub fn run_c_convergence(cfg: &CConvergenceConfig, tables: &TableSource) -> Result<CConvergence> {
    if !(cfg.sigma > 0.0 && cfg.sigma < PI) {
        return Err(domain(format!("sigma must lie in (0, pi), got {}", cfg.sigma)));
    }
    if cfg.c_grid.len() < 5 || cfg.c_grid.windows(2).any(|w| w[1] <= w[0]) || cfg.c_grid.iter().any(|c| !(*c > 0.0)) {
        return Err(domain("c_grid must be increasing, positive and hold at least 5 values"));
    }
    if cfg.family == KernelFamily::Gaussian {
        return Err(Error::Unsupported("the shape study varies c and needs a multiquadric-type kernel".into()));
    }
    check_positive("window", cfg.window)?;
    if cfg.section == 0 || cfg.section > MAX_LEVEL || cfg.resolution == 0 {
        return Err(domain("section and resolution must be positive"));
    }
    let f = TestFunction::fejer(cfg.sigma)?.scaled(cfg.amplitude);
    let s = cfg.section;
    let values: Vec<f64> = (-(s as i64)..=s as i64).map(|j| f.eval(j as f64)).collect();
    // the integer section at unit spacing is the level-s lattice of the kernel shrunk by s
    let unit_scale = s as f64;

    let mut rows = Vec::new();
    let mut truncated_at = None;
    let mut kernel_for_tag = None;
    for &c in &cfg.c_grid {
        let kernel = Kernel::new(cfg.family, cfg.alpha, c)?;
        kernel_for_tag.get_or_insert(kernel);
        let base = kernel.dilated(1.0 / unit_scale);
        let interp =
            cardinal_path(&base, s, values.clone(), cfg.window / unit_scale, cfg.epsilon, cfg.oversample, tables)?;
        let report = error_norms(&f, |x| interp.eval(x / unit_scale), cfg.window, 1.0 / cfg.resolution as f64)?;
        if report.l2_window < cfg.underflow {
            log::warn!("error {:e} at c = {c} is below {:e}; truncating the c grid", report.l2_window, cfg.underflow);
            truncated_at = Some(c);
            break;
        }
        rows.push(CRow { c, report, used_in_fit: report.l2_window >= FIT_FLOOR });
    }
    let kernel = kernel_for_tag.expect("c_grid is nonempty");
    let xs: Vec<f64> = rows.iter().map(|r| r.c).collect();
    let errs: Vec<f64> = rows.iter().map(|r| r.report.l2_window).collect();
    let fit = fit_log_errors(&xs, &errs, FIT_FLOOR).ok();

    let target = -cfg.slope_factor * (PI - cfg.sigma);
    let checks = vec![match &fit {
        Some(fit) => Check::new("slope", fit.slope, format!("<= {target:e}"), fit.slope <= target),
        None => Check::new("slope", f64::NAN, "at least 4 errors above 1e-13", false),
    }];

    let config = to_value(cfg);
    let mut csv =
        CsvWriter::new(&config, &["c", "l2_error", "sup_error", "self_check", "tail_estimate", "used_in_fit"]);
    for row in &rows {
        let r = &row.report;
        csv.row(&[
            num(row.c),
            num(r.l2_window),
            num(r.sup_window),
            num(r.self_check),
            opt(r.tail_estimate),
            row.used_in_fit.to_string(),
        ]);
    }
    let extra = json!({
        "slope": fit.as_ref().map(|f| f.slope),
        "r_squared": fit.as_ref().map(|f| f.r_squared),
        "predicted_slope": -(PI - cfg.sigma),
        "truncated_at": truncated_at,
    });
    let output = finish("c-conv", &[kernel], config, csv, &checks, extra);
    Ok(CConvergence { rows, fit, truncated_at, checks, output })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NoiseConfig {
    pub degree: usize,
    pub n_grid: Vec<usize>,
    pub delta_grid: Vec<f64>,
    pub seed: u64,
    pub distribution: NoiseDistribution,
    pub kernel: KernelSpec,
    pub epsilon: f64,
    pub oversample: usize,
    pub window: f64,
    pub resolution: usize,
    /// Iterations used to estimate the frame bounds of each node section.
    pub frame_probes: usize,
}

impl Default for NoiseConfig {
    fn default() -> Self {
        NoiseConfig {
            degree: 3,
            n_grid: vec![8, 16, 32, 64],
            delta_grid: vec![0.0, 1e-3, 1e-2],
            seed: 1,
            distribution: NoiseDistribution::Gaussian,
            kernel: default_kernel(),
            epsilon: 1e-12,
            oversample: 16,
            window: 4.0,
            resolution: 8,
            frame_probes: 100,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NoiseRow {
    pub delta: f64,
    pub n: usize,
    pub lower_frame_bound: f64,
    pub report: ErrorReport,
    /// √N times the L2 error: the error measured in the unit-spacing variable.
    pub lattice_error: f64,
    /// δ/√A
    pub floor: f64,
}

#[derive(Debug, Clone)]
pub struct NoiseStudy {
    pub rows: Vec<NoiseRow>,
    pub checks: Vec<Check>,
    pub output: StudyOutput,
}

pub fn run_noise_floor(cfg: &NoiseConfig, tables: &TableSource) -> Result<NoiseStudy> {
    check_grid("n_grid", &cfg.n_grid)?;
    if cfg.delta_grid.is_empty() || cfg.delta_grid.iter().any(|d| !(*d >= 0.0 && d.is_finite())) {
        return Err(domain("delta_grid must hold nonnegative noise levels"));
    }
    let f = TestFunction::bspline(cfg.degree)?;
    let kernel = cfg.kernel.to_kernel()?;
    let bounds: Vec<f64> = cfg
        .n_grid
        .iter()
        .map(|&n| estimate_frame_bounds(&NodeSequence::integers(n), PI, cfg.frame_probes).map(|b| b.lower))
        .collect::<Result<_>>()?;

    let lattice = Lattice {
        kernel,
        epsilon: cfg.epsilon,
        oversample: cfg.oversample,
        window: cfg.window,
        resolution: cfg.resolution,
        tables,
    };
    let mut rows = Vec::new();
    for &delta in &cfg.delta_grid {
        let spec = NoiseSpec { delta, seed: cfg.seed, distribution: cfg.distribution };
        let reports = lattice.errors(&f, &cfg.n_grid, (delta > 0.0).then_some(&spec))?;
        for ((&n, report), &a) in cfg.n_grid.iter().zip(reports).zip(&bounds) {
            rows.push(NoiseRow {
                delta,
                n,
                lower_frame_bound: a,
                report,
                lattice_error: (n as f64).sqrt() * report.l2_window,
                floor: delta / a.sqrt(),
            });
        }
    }

    let curve =
        |delta: f64| -> Vec<f64> { rows.iter().filter(|r| r.delta == delta).map(|r| r.lattice_error).collect() };
    let mut checks = Vec::new();
    let mut per_delta = Vec::new();
    for &delta in &cfg.delta_grid {
        let e = curve(delta);
        let last = *e.last().unwrap();
        if delta == 0.0 {
            let worst = e.windows(2).map(|w| w[1] / w[0]).fold(0.0, f64::max);
            if e.len() >= 2 {
                checks.push(Check::new("clean error decrease per refinement", worst, "<= 0.6", worst <= 0.6));
            }
            per_delta.push(json!({"delta": delta, "final_lattice_error": last}));
            continue;
        }
        let in_band = last >= 0.1 * delta && last <= 10.0 * delta;
        checks.push(Check::new(
            format!("final error at delta={delta:e}"),
            last,
            format!("[{:e}, {:e}]", 0.1 * delta, 10.0 * delta),
            in_band,
        ));
        let plateau = e.len() >= 2 && {
            let prev = e[e.len() - 2];
            (last - prev).abs() / prev < 0.2
        };
        let change = if e.len() >= 2 { (last - e[e.len() - 2]).abs() / e[e.len() - 2] } else { f64::NAN };
        checks.push(Check::new(format!("plateau at delta={delta:e}"), change, "< 0.2", plateau));
        per_delta.push(json!({"delta": delta, "final_lattice_error": last, "plateau": plateau, "in_band": in_band}));
    }
    let positive: Vec<f64> = cfg.delta_grid.iter().copied().filter(|d| *d > 0.0).collect();
    for pair in positive.windows(2) {
        let ratio = curve(pair[1]).last().unwrap() / curve(pair[0]).last().unwrap();
        let scale = pair[1] / pair[0];
        let (lo, hi) = (0.3 * scale, 3.0 * scale);
        checks.push(Check::new(
            format!("floor ratio delta={:e}/{:e}", pair[1], pair[0]),
            ratio,
            format!("[{lo:e}, {hi:e}]"),
            ratio >= lo && ratio <= hi,
        ));
    }
    let plateau = per_delta.iter().filter_map(|d| d.get("plateau")).all(|p| p == &Value::Bool(true));

    let config = to_value(cfg);
    let mut csv = CsvWriter::new(
        &config,
        &["delta", "N", "lower_frame_bound", "l2_error", "lattice_error", "floor", "sup_error", "self_check"],
    );
    for r in &rows {
        csv.row(&[
            num(r.delta),
            r.n.to_string(),
            num(r.lower_frame_bound),
            num(r.report.l2_window),
            num(r.lattice_error),
            num(r.floor),
            num(r.report.sup_window),
            num(r.report.self_check),
        ]);
    }
    let extra = json!({ "plateau": plateau, "deltas": per_delta });
    let output = finish("noise", &[kernel], config, csv, &checks, extra);
    Ok(NoiseStudy { rows, checks, output })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FiniteSupportRun {
    pub indices: Vec<i64>,
    pub magnitude: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct JitterConfig {
    pub sigma: f64,
    pub section: usize,
    pub window: f64,
    pub kernel: KernelSpec,
    pub l_grid: Vec<f64>,
    pub patterns: Vec<JitterPattern>,
    pub finite_support: Option<FiniteSupportRun>,
    pub seed: u64,
    pub epsilon: f64,
    pub oversample: usize,
    pub resolution: usize,
}

impl Default for JitterConfig {
    fn default() -> Self {
        JitterConfig {
            sigma: PI / 2.0,
            section: 32,
            window: 16.0,
            kernel: default_kernel(),
            l_grid: vec![0.0, 0.05, 0.1, 0.15, 0.2, 0.24],
            patterns: vec![JitterPattern::Alternating, JitterPattern::UniformRandom],
            finite_support: Some(FiniteSupportRun { indices: vec![-1, 0, 1], magnitude: 0.05 }),
            seed: 3,
            epsilon: 1e-12,
            oversample: 16,
            resolution: 8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JitterRow {
    pub pattern: &'static str,
    pub magnitude: f64,
    pub kadec_margin: f64,
    pub cond_estimate: f64,
    pub report: ErrorReport,
    pub ratio: f64,
}

#[derive(Debug, Clone)]
pub struct JitterStudy {
    pub baseline_error: f64,
    pub cardinal_error: f64,
    pub rows: Vec<JitterRow>,
    pub checks: Vec<Check>,
    pub output: StudyOutput,
}

pub fn run_jitter_study(cfg: &JitterConfig, tables: &TableSource) -> Result<JitterStudy> {
    let magnitudes = cfg.l_grid.iter().copied().chain(cfg.finite_support.as_ref().map(|f| f.magnitude));
    for l in magnitudes {
        if !(0.0..0.25).contains(&l) {
            return Err(Error::JitterTooLarge(format!("jitter {l} must lie in [0, 1/4)")));
        }
    }
    if cfg.section == 0 || cfg.section > MAX_LEVEL || cfg.resolution == 0 {
        return Err(domain("section and resolution must be positive"));
    }
    check_positive("window", cfg.window)?;
    let f = TestFunction::fejer(cfg.sigma)?;
    let kernel = cfg.kernel.to_kernel()?;
    let base = NodeSequence::integers(cfg.section);
    let step = 1.0 / cfg.resolution as f64;

    let gram_error = |ns: &NodeSequence| -> Result<(ErrorReport, f64)> {
        let samples = SampleSet::from_fn(ns.nodes().to_vec(), |x| f.eval(x))?;
        let interp = fit_gram(&samples, &kernel)?;
        Ok((error_norms(&f, |x| interp.eval(x), cfg.window, step)?, interp.cond_estimate()))
    };
    let (baseline, _) = gram_error(&base)?;
    let e0 = baseline.l2_window;

    let s = cfg.section as f64;
    let values: Vec<f64> = base.nodes().iter().map(|&x| f.eval(x)).collect();
    let interp = cardinal_path(
        &kernel.dilated(1.0 / s),
        cfg.section,
        values,
        cfg.window / s,
        cfg.epsilon,
        cfg.oversample,
        tables,
    )?;
    let cardinal = error_norms(&f, |x| interp.eval(x / s), cfg.window, step)?;

    let mut rows = Vec::new();
    let mut run = |pattern: &JitterPattern, l: f64| -> Result<()> {
        let ns = apply_jitter(&base, &JitterSpec { magnitude: l, seed: cfg.seed, pattern: pattern.clone() })?;
        let (report, cond) = gram_error(&ns)?;
        rows.push(JitterRow {
            pattern: pattern.name(),
            magnitude: l,
            kadec_margin: kadec_margin(&ns),
            cond_estimate: cond,
            ratio: report.l2_window / e0,
            report,
        });
        Ok(())
    };
    for pattern in &cfg.patterns {
        for &l in &cfg.l_grid {
            run(pattern, l)?;
        }
    }
    if let Some(fs) = &cfg.finite_support {
        run(&JitterPattern::FiniteSupport { indices: fs.indices.clone() }, fs.magnitude)?;
    }

    let mut checks = Vec::new();
    let worst = rows.iter().map(|r| r.ratio).fold(0.0, f64::max);
    checks.push(Check::new("bounded errors", worst, "finite", rows.iter().all(|r| r.ratio.is_finite())));
    for r in rows.iter().filter(|r| r.magnitude == 0.0) {
        checks.push(Check::new(format!("{} ratio at L=0", r.pattern), r.ratio, "= 1", (r.ratio - 1.0).abs() <= 1e-12));
    }
    if cfg.finite_support.is_some() {
        let r = rows.last().unwrap();
        checks.push(Check::new("finite-support ratio", r.ratio, "<= 2", r.ratio <= 2.0));
    }

    let config = to_value(cfg);
    let mut csv =
        CsvWriter::new(&config, &["pattern", "L", "kadec_margin", "cond_estimate", "l2_error", "sup_error", "ratio"]);
    for r in &rows {
        csv.row(&[
            r.pattern.to_string(),
            num(r.magnitude),
            num(r.kadec_margin),
            num(r.cond_estimate),
            num(r.report.l2_window),
            num(r.report.sup_window),
            num(r.ratio),
        ]);
    }
    let extra = json!({ "baseline_gram_error": e0, "unjittered_cardinal_error": cardinal.l2_window });
    let output = finish("jitter", &[kernel], config, csv, &checks, extra);
    Ok(JitterStudy { baseline_error: e0, cardinal_error: cardinal.l2_window, rows, checks, output })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ConditioningConfig {
    pub n_grid: Vec<usize>,
    pub kernels: Vec<KernelSpec>,
    pub degree: usize,
    pub window: f64,
    pub resolution: usize,
    pub epsilon: f64,
    pub oversample: usize,
    /// Levels at which the two paths are compared head to head.
    pub compare_levels: Vec<usize>,
}

impl Default for ConditioningConfig {
    fn default() -> Self {
        ConditioningConfig {
            n_grid: vec![1, 2, 4, 8],
            kernels: vec![
                KernelSpec { family: KernelFamily::Gaussian, alpha: None, c: None, lambda: Some(1.0) },
                default_kernel(),
            ],
            degree: 3,
            window: 4.0,
            resolution: 8,
            epsilon: 1e-12,
            oversample: 16,
            compare_levels: vec![2, 4],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConditioningRow {
    pub kernel: Kernel,
    pub n: usize,
    pub nodes: usize,
    pub cond: f64,
    pub gram_error: Option<f64>,
    pub cardinal_error: f64,
    pub gram_seconds: f64,
    pub cardinal_seconds: f64,
}

#[derive(Debug, Clone)]
pub struct ConditioningStudy {
    pub rows: Vec<ConditioningRow>,
    pub checks: Vec<Check>,
    pub output: StudyOutput,
}

pub fn run_conditioning_study(cfg: &ConditioningConfig, tables: &TableSource) -> Result<ConditioningStudy> {
    check_grid("n_grid", &cfg.n_grid)?;
    if cfg.kernels.is_empty() {
        return Err(domain("at least one kernel is required"));
    }
    let f = TestFunction::bspline(cfg.degree)?;
    let kernels: Vec<Kernel> = cfg.kernels.iter().map(KernelSpec::to_kernel).collect::<Result<_>>()?;
    let mut rows = Vec::new();
    for kernel in &kernels {
        for &n in &cfg.n_grid {
            let step = 1.0 / (cfg.resolution * n) as f64;
            let values = lattice_values(&f, n);
            let nodes: Vec<f64> = (-(n as i64)..=n as i64).map(|j| j as f64 / n as f64).collect();

            let start = Instant::now();
            let mut cond = gram_condition(&nodes, kernel)?;
            let gram_error = match fit_gram(&SampleSet::new(nodes.clone(), values.clone())?, kernel) {
                Ok(g) => Some(error_norms(&f, |x| g.eval(x), cfg.window, step)?.l2_window),
                Err(Error::IllConditioned { .. }) => {
                    cond = f64::INFINITY;
                    None
                }
                Err(e) => return Err(e),
            };
            let gram_seconds = start.elapsed().as_secs_f64();

            let start = Instant::now();
            let interp = cardinal_path(kernel, n, values, cfg.window, cfg.epsilon, cfg.oversample, tables)?;
            let cardinal_error = error_norms(&f, |x| interp.eval(x), cfg.window, step)?.l2_window;
            let cardinal_seconds = start.elapsed().as_secs_f64();

            rows.push(ConditioningRow {
                kernel: *kernel,
                n,
                nodes: nodes.len(),
                cond,
                gram_error,
                cardinal_error,
                gram_seconds,
                cardinal_seconds,
            });
        }
    }

    let mut checks = Vec::new();
    for kernel in kernels.iter().filter(|k| k.family() == KernelFamily::Gaussian) {
        let conds: Vec<f64> = rows.iter().filter(|r| r.kernel == *kernel).map(|r| r.cond).collect();
        let growth = conds
            .windows(2)
            .map(|w| if w[1].is_infinite() { f64::INFINITY } else { w[1] / w[0] })
            .fold(f64::INFINITY, f64::min);
        checks.push(Check::new(format!("{kernel} condition growth per refinement"), growth, ">= 10", growth >= 10.0));
    }
    let worst = rows.iter().map(|r| r.cardinal_error).fold(0.0, f64::max);
    checks.push(Check::new(
        "cardinal errors bounded",
        worst,
        "finite",
        rows.iter().all(|r| r.cardinal_error.is_finite()),
    ));
    for r in rows.iter().filter(|r| cfg.compare_levels.contains(&r.n)) {
        if let Some(g) = r.gram_error {
            let ratio = r.cardinal_error / g;
            checks.push(Check::new(
                format!("{} cardinal/gram error at N={}", r.kernel, r.n),
                ratio,
                "<= 10",
                ratio <= 10.0,
            ));
        }
    }

    let config = to_value(cfg);
    let mut csv = CsvWriter::new(&config, &["kernel", "N", "h", "nodes", "cond", "gram_error", "cardinal_error"]);
    for r in &rows {
        csv.row(&[
            r.kernel.tag(),
            r.n.to_string(),
            num(1.0 / r.n as f64),
            r.nodes.to_string(),
            num(r.cond),
            opt(r.gram_error),
            num(r.cardinal_error),
        ]);
    }
    let timings: Vec<Value> = rows
        .iter()
        .map(|r| json!({"kernel": r.kernel.tag(), "N": r.n, "gram_seconds": r.gram_seconds, "cardinal_seconds": r.cardinal_seconds}))
        .collect();
    let output = finish("conditioning", &kernels, config, csv, &checks, json!({ "timings": timings }));
    Ok(ConditioningStudy { rows, checks, output })
}
