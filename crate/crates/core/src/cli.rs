//! Command-line front end: `tau`, `table`, `interp` and `study`.

use crate::cardinal::{build_cardinal_table_with, compute_tau, CardinalTable, TableOptions};
use crate::error::{Error, Result};
use crate::experiments::{
    run_c_convergence, run_conditioning_study, run_h_convergence, run_jitter_study, run_noise_floor,
    CConvergenceConfig, ConditioningConfig, HConvergenceConfig, JitterConfig, NoiseConfig, StudyOutput, TableSource,
};
use crate::interpolation::{fit_gram, fit_uniform, SampleSet};
use crate::kernels::{Kernel, KernelFamily, KernelSpec};
use crate::sampling::JitterPattern;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

const DEFAULT_EPSILON: f64 = 1e-16;
const DEFAULT_HALF_WIDTH: usize = 32;
const DEFAULT_OVERSAMPLE: usize = 16;
const DEFAULT_CACHE: &str = "rbf-cache";

#[derive(Debug, Parser)]
#[command(
    name = "rbf-cardinal",
    version,
    about = "Cardinal interpolation with multiquadric, Poisson and Gaussian kernels"
)]
struct Cli {
    /// JSON run configuration; flags given on the command line take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Truncation index for the periodized symbol.
    Tau(KernelArgs),
    /// Build or load a cardinal function table.
    Table {
        #[command(flatten)]
        kernel: KernelArgs,
        #[command(flatten)]
        table: TableArgs,
        /// Write the table to this file instead of the cache directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Interpolate a sample file and evaluate on a probe grid.
    Interp {
        /// Two-column sample file: node, value.
        samples: PathBuf,
        #[command(flatten)]
        kernel: KernelArgs,
        #[command(flatten)]
        table: TableArgs,
        #[arg(long, value_enum)]
        mode: Option<Mode>,
        /// Probe spacing; defaults to a quarter of the smallest node gap.
        #[arg(long)]
        step: Option<f64>,
        /// CSV destination; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run one of the convergence studies and write its CSV and JSON summary.
    Study(StudyArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Auto,
    Grid,
    Scattered,
}

#[derive(Debug, Args)]
struct KernelArgs {
    #[arg(long)]
    family: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    alpha: Option<f64>,
    #[arg(long)]
    c: Option<f64>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    eps: Option<f64>,
}

#[derive(Debug, Args)]
struct TableArgs {
    /// Table half-width.
    #[arg(long = "N")]
    n: Option<usize>,
    /// Oversampling factor.
    #[arg(long = "M")]
    m: Option<usize>,
    /// Lagrange order used between table points.
    #[arg(long)]
    order: Option<usize>,
    #[arg(long)]
    cache: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct StudyArgs {
    /// c-conv, h-conv, noise, jitter or conditioning.
    name: Option<String>,
    #[arg(long = "study")]
    study_flag: Option<String>,
    #[command(flatten)]
    kernel: KernelArgs,
    /// Sample section size (c-conv, jitter).
    #[arg(long = "N")]
    n: Option<usize>,
    #[arg(long = "M")]
    m: Option<usize>,
    #[arg(long)]
    degree: Option<usize>,
    #[arg(long)]
    sigma: Option<f64>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    jitter: Option<f64>,
    #[arg(long)]
    pattern: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value = ".")]
    out: PathBuf,
    #[arg(long)]
    cache: Option<PathBuf>,
}

/// Options accepted in a `--config` file.
#[derive(Debug, Default, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: Option<String>,
    pub kernel: Option<KernelSpec>,
    pub epsilon: Option<f64>,
    #[serde(rename = "N")]
    pub n: Option<usize>,
    #[serde(rename = "M")]
    pub m: Option<usize>,
    pub interp_order: Option<usize>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub cache: Option<PathBuf>,
    pub study: Option<String>,
    /// Study settings, checked against the named study's own schema.
    pub study_config: Option<Value>,
    pub mode: Option<Mode>,
    pub step: Option<f64>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }
}

/// Resolves the kernel from flags over the config file; Poisson with c = 1 by default.
fn resolve_kernel(args: &KernelArgs, cfg: &RunConfig) -> Result<Option<KernelSpec>> {
    let given = args.family.is_some() || args.alpha.is_some() || args.c.is_some() || args.lambda.is_some();
    if !given {
        return Ok(cfg.kernel);
    }
    let family = match &args.family {
        Some(f) => KernelFamily::parse(f)?,
        None => match (cfg.kernel, args.lambda) {
            (_, Some(_)) => KernelFamily::Gaussian,
            (Some(k), None) => k.family,
            (None, None) => KernelFamily::Poisson,
        },
    };
    let inherit = cfg.kernel.filter(|k| k.family == family);
    let mut spec = inherit.unwrap_or(KernelSpec { family, alpha: None, c: None, lambda: None });
    if args.alpha.is_some() {
        spec.alpha = args.alpha;
    }
    if args.c.is_some() {
        spec.c = args.c;
    }
    if args.lambda.is_some() {
        spec.lambda = args.lambda;
    }
    spec.to_kernel()?;
    Ok(Some(spec))
}

fn kernel_or_default(spec: Option<KernelSpec>) -> Result<Kernel> {
    match spec {
        Some(s) => s.to_kernel(),
        None => Kernel::poisson(1.0),
    }
}

fn table_options(order: Option<usize>) -> Result<TableOptions> {
    let mut opts = TableOptions::default();
    if let Some(order) = order {
        if !matches!(order, 2 | 4 | 6 | 8) {
            return Err(Error::Config(format!("interpolation order must be 2, 4, 6 or 8, got {order}")));
        }
        opts.interp_order = order;
    }
    Ok(opts)
}

fn cmd_tau(args: &KernelArgs, cfg: &RunConfig, out: &mut dyn Write) -> Result<()> {
    let kernel = kernel_or_default(resolve_kernel(args, cfg)?)?;
    let eps = args.eps.or(cfg.epsilon).unwrap_or(DEFAULT_EPSILON);
    let plan = compute_tau(&kernel, eps)?;
    let fmt = |v: Option<f64>| v.map_or_else(|| "n/a".to_string(), |v| format!("{v:e}"));
    writeln!(out, "kernel: {kernel}")?;
    writeln!(out, "epsilon: {eps:e}")?;
    writeln!(out, "rule: {:?}", plan.rule)?;
    writeln!(out, "tau: {}", plan.tau)?;
    writeln!(out, "terms: {}", plan.terms())?;
    writeln!(out, "gamma: {}", fmt(plan.gamma))?;
    writeln!(out, "D: {}", fmt(plan.d_lower))?;
    Ok(())
}

fn cmd_table(
    kernel_args: &KernelArgs,
    t: &TableArgs,
    dest: Option<&Path>,
    cfg: &RunConfig,
    out: &mut dyn Write,
) -> Result<()> {
    let kernel = kernel_or_default(resolve_kernel(kernel_args, cfg)?)?;
    let eps = kernel_args.eps.or(cfg.epsilon).unwrap_or(DEFAULT_EPSILON);
    let n = t.n.or(cfg.n).unwrap_or(DEFAULT_HALF_WIDTH);
    let m = t.m.or(cfg.m).unwrap_or(DEFAULT_OVERSAMPLE);
    let opts = table_options(t.order.or(cfg.interp_order))?;
    let suggest = |e: Error| match e {
        Error::Bandwidth(msg) => Error::Bandwidth(format!("{msg}; try a larger oversampling, e.g. --M {}", 2 * m)),
        other => other,
    };
    let dest = dest.map(Path::to_path_buf).or_else(|| cfg.out.clone());
    let (table, path, hit) = match dest {
        Some(path) => {
            let table = build_cardinal_table_with(&kernel, eps, n, m, opts).map_err(suggest)?;
            table.save(&path)?;
            (table, path, false)
        }
        None => {
            let dir = t.cache.clone().or_else(|| cfg.cache.clone()).unwrap_or_else(|| PathBuf::from(DEFAULT_CACHE));
            let (table, hit) = CardinalTable::cached(&dir, &kernel, eps, n, m, opts).map_err(suggest)?;
            (table, CardinalTable::cache_path(&dir, &kernel, eps, n, m, opts.interp_order), hit)
        }
    };
    writeln!(out, "kernel: {kernel}")?;
    writeln!(out, "half-width: {n}")?;
    writeln!(out, "oversample: {m}")?;
    writeln!(out, "file: {}", path.display())?;
    writeln!(out, "cache: {}", if hit { "hit" } else { "miss" })?;
    if let Some(d) = table.diagnostics() {
        writeln!(out, "tau: {}", d.tau)?;
        writeln!(out, "dft-length: {}", d.dft_len)?;
    }
    writeln!(out, "delta-residual: {:e}", table.delta_residual())?;
    Ok(())
}

fn cmd_interp(
    samples_path: &Path,
    kernel_args: &KernelArgs,
    t: &TableArgs,
    mode: Option<Mode>,
    step: Option<f64>,
    dest: Option<&Path>,
    cfg: &RunConfig,
    out: &mut dyn Write,
) -> Result<()> {
    let file = fs::File::open(samples_path)?;
    let samples = SampleSet::parse(std::io::BufReader::new(file))?;
    let spec = resolve_kernel(kernel_args, cfg)?;
    let kernel = kernel_or_default(spec)?;
    let eps = kernel_args.eps.or(cfg.epsilon).unwrap_or(1e-12);
    let mode = mode.or(cfg.mode).unwrap_or(Mode::Auto);
    let level = samples.uniform_level();
    let use_grid = match mode {
        Mode::Grid => {
            level.ok_or_else(|| Error::GridMismatch("samples are not on a grid j/N with |j| <= N".into()))?;
            true
        }
        Mode::Scattered => false,
        Mode::Auto => level.is_some(),
    };
    let nodes = samples.nodes();
    let gap = if nodes.len() > 1 { samples.min_separation() } else { 1.0 };
    let step = step.or(cfg.step).unwrap_or(gap / 4.0);
    if !(step > 0.0 && step.is_finite()) {
        return Err(Error::Config(format!("probe step must be positive, got {step}")));
    }
    let (lo, hi) = (nodes[0], nodes[nodes.len() - 1]);
    let count = ((hi - lo) / step).round() as usize;
    let probes: Vec<f64> = (0..=count).map(|i| if i == count { hi } else { lo + i as f64 * step }).collect();

    let values: Vec<f64> = if use_grid {
        let n = level.expect("grid mode has a level");
        let half_width = t.n.or(cfg.n).unwrap_or(2 * n).max(2 * n);
        let m = t.m.or(cfg.m).unwrap_or(DEFAULT_OVERSAMPLE);
        let opts = table_options(t.order.or(cfg.interp_order))?;
        let dir = t.cache.clone().or_else(|| cfg.cache.clone());
        let source = dir.map_or_else(TableSource::in_memory, TableSource::with_cache).with_options(opts);
        let table = source.get(&kernel.dilated(n as f64), eps, half_width, m)?;
        let interp = fit_uniform(&samples, &kernel, table)?;
        probes.iter().map(|&x| interp.eval(x)).collect()
    } else {
        let interp = fit_gram(&samples, &kernel)?;
        probes.iter().map(|&x| interp.eval(x)).collect()
    };

    let header = json!({
        "command": "interp",
        "samples": samples_path.display().to_string(),
        "mode": if use_grid { "grid" } else { "scattered" },
        "kernel": KernelSpec::from(kernel),
        "epsilon": eps,
        "step": step,
    });
    let mut text = format!("# config: {header}\nx,value\n");
    for (x, v) in probes.iter().zip(&values) {
        text.push_str(&format!("{x:e},{v:e}\n"));
    }
    match dest.map(Path::to_path_buf).or_else(|| cfg.out.clone()) {
        Some(path) => {
            fs::write(&path, text)?;
            writeln!(out, "wrote {} probes to {}", probes.len(), path.display())?;
        }
        None => out.write_all(text.as_bytes())?,
    }
    Ok(())
}

fn study_config<T: DeserializeOwned + Default>(cfg: &RunConfig) -> Result<T> {
    match &cfg.study_config {
        Some(v) => serde_json::from_value(v.clone()).map_err(|e| Error::Config(format!("study_config: {e}"))),
        None => Ok(T::default()),
    }
}

fn reject(flag: &str, study: &str, given: bool) -> Result<()> {
    if given {
        Err(Error::Config(format!("--{flag} does not apply to the {study} study")))
    } else {
        Ok(())
    }
}

fn cmd_study(a: &StudyArgs, cfg: &RunConfig, out: &mut dyn Write) -> Result<()> {
    let name = a
        .name
        .clone()
        .or_else(|| a.study_flag.clone())
        .or_else(|| cfg.study.clone())
        .ok_or_else(|| Error::Config("a study name is required".into()))?;
    let kernel = resolve_kernel(&a.kernel, cfg)?;
    let eps = a.kernel.eps.or(cfg.epsilon);
    let m = a.m.or(cfg.m);
    let seed = a.seed.or(cfg.seed);
    let n = a.n.or(cfg.n);
    let cache = a.cache.clone().or_else(|| cfg.cache.clone());
    let tables = cache.map_or_else(TableSource::in_memory, TableSource::with_cache);

    let output: StudyOutput = match name.as_str() {
        "h-conv" => {
            let mut c: HConvergenceConfig = study_config(cfg)?;
            for (flag, given) in [
                ("N", n.is_some()),
                ("sigma", a.sigma.is_some()),
                ("delta", a.delta.is_some()),
                ("jitter", a.jitter.is_some()),
                ("pattern", a.pattern.is_some()),
                ("seed", seed.is_some()),
            ] {
                reject(flag, &name, given)?;
            }
            c.degree = a.degree.unwrap_or(c.degree);
            c.kernel = kernel.unwrap_or(c.kernel);
            c.epsilon = eps.unwrap_or(c.epsilon);
            c.oversample = m.unwrap_or(c.oversample);
            run_h_convergence(&c, &tables)?.output
        }
        "c-conv" => {
            let mut c: CConvergenceConfig = study_config(cfg)?;
            for (flag, given) in [
                ("degree", a.degree.is_some()),
                ("delta", a.delta.is_some()),
                ("jitter", a.jitter.is_some()),
                ("pattern", a.pattern.is_some()),
                ("seed", seed.is_some()),
                ("c", a.kernel.c.is_some()),
                ("lambda", a.kernel.lambda.is_some()),
            ] {
                reject(flag, &name, given)?;
            }
            if let Some(k) = kernel {
                c.family = k.family;
                c.alpha = k.alpha;
            }
            c.sigma = a.sigma.unwrap_or(c.sigma);
            c.section = n.unwrap_or(c.section);
            c.epsilon = eps.unwrap_or(c.epsilon);
            c.oversample = m.unwrap_or(c.oversample);
            run_c_convergence(&c, &tables)?.output
        }
        "noise" => {
            let mut c: NoiseConfig = study_config(cfg)?;
            for (flag, given) in [
                ("N", n.is_some()),
                ("sigma", a.sigma.is_some()),
                ("jitter", a.jitter.is_some()),
                ("pattern", a.pattern.is_some()),
            ] {
                reject(flag, &name, given)?;
            }
            c.degree = a.degree.unwrap_or(c.degree);
            if let Some(d) = a.delta {
                c.delta_grid = vec![0.0, d];
            }
            c.seed = seed.unwrap_or(c.seed);
            c.kernel = kernel.unwrap_or(c.kernel);
            c.epsilon = eps.unwrap_or(c.epsilon);
            c.oversample = m.unwrap_or(c.oversample);
            run_noise_floor(&c, &tables)?.output
        }
        "jitter" => {
            let mut c: JitterConfig = study_config(cfg)?;
            for (flag, given) in [("degree", a.degree.is_some()), ("delta", a.delta.is_some())] {
                reject(flag, &name, given)?;
            }
            if let Some(l) = a.jitter {
                c.l_grid = vec![0.0, l];
            }
            if let Some(p) = &a.pattern {
                c.patterns = vec![JitterPattern::parse(p)?];
            }
            c.sigma = a.sigma.unwrap_or(c.sigma);
            c.section = n.unwrap_or(c.section);
            c.seed = seed.unwrap_or(c.seed);
            c.kernel = kernel.unwrap_or(c.kernel);
            c.epsilon = eps.unwrap_or(c.epsilon);
            c.oversample = m.unwrap_or(c.oversample);
            run_jitter_study(&c, &tables)?.output
        }
        "conditioning" => {
            let mut c: ConditioningConfig = study_config(cfg)?;
            for (flag, given) in [
                ("N", n.is_some()),
                ("sigma", a.sigma.is_some()),
                ("delta", a.delta.is_some()),
                ("jitter", a.jitter.is_some()),
                ("pattern", a.pattern.is_some()),
                ("seed", seed.is_some()),
            ] {
                reject(flag, &name, given)?;
            }
            c.degree = a.degree.unwrap_or(c.degree);
            if let Some(k) = kernel {
                c.kernels = vec![k];
            }
            c.epsilon = eps.unwrap_or(c.epsilon);
            c.oversample = m.unwrap_or(c.oversample);
            run_conditioning_study(&c, &tables)?.output
        }
        other => {
            return Err(Error::Config(format!(
                "unknown study '{other}'; expected c-conv, h-conv, noise, jitter or conditioning"
            )))
        }
    };
    let dir = if a.out == Path::new(".") { cfg.out.clone().unwrap_or_else(|| a.out.clone()) } else { a.out.clone() };
    let (csv, js) = output.write(&dir)?;
    if let Some(checks) = output.summary["checks"].as_array() {
        for check in checks {
            let verdict = if check["pass"] == Value::Bool(true) { "PASS" } else { "FAIL" };
            writeln!(
                out,
                "{verdict} {}: {} (bound {})",
                check["name"].as_str().unwrap_or(""),
                check["value"],
                check["bound"].as_str().unwrap_or("")
            )?;
        }
    }
    writeln!(out, "study {}: {}", output.study, if output.passed { "pass" } else { "fail" })?;
    writeln!(out, "csv: {}", csv.display())?;
    writeln!(out, "summary: {}", js.display())?;
    Ok(())
}

fn dispatch(cli: &Cli, out: &mut dyn Write) -> Result<()> {
    let cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    let name = match &cli.command {
        Command::Tau(_) => "tau",
        Command::Table { .. } => "table",
        Command::Interp { .. } => "interp",
        Command::Study(_) => "study",
    };
    if let Some(c) = &cfg.command {
        if c != name {
            return Err(Error::Config(format!("config is for '{c}' but '{name}' was requested")));
        }
    }
    match &cli.command {
        Command::Tau(k) => cmd_tau(k, &cfg, out),
        Command::Table { kernel, table, out: dest } => cmd_table(kernel, table, dest.as_deref(), &cfg, out),
        Command::Interp { samples, kernel, table, mode, step, out: dest } => {
            cmd_interp(samples, kernel, table, *mode, *step, dest.as_deref(), &cfg, out)
        }
        Command::Study(a) => cmd_study(a, &cfg, out),
    }
}

/// Runs the CLI on `args` (program name first) and returns the process exit code:
/// 0 on success, 1 for numerical failures, 2 for usage and configuration errors.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = if e.use_stderr() { write!(err, "{e}") } else { write!(out, "{e}") };
            return code;
        }
    };
    match dispatch(&cli, out) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            if e.is_numerical() {
                1
            } else {
                2
            }
        }
    }
}
