//! Node sequences near the integers: Kadec margin, frame-bound estimates and
//! perturbation arithmetic, and seeded jitter and noise.

use crate::error::{domain, Error, Result};
use crate::linalg::{extreme_eigenvalues, symmetric_from_fn, SymmetricFactor};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

const MIN_SEPARATION: f64 = 1e-9;

/// Nodes x_j, j = −N..N, perturbing the integers.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeSequence {
    nodes: Vec<f64>,
    jitter: Option<f64>,
}

impl NodeSequence {
    /// The integers −N..N.
    pub fn integers(n: usize) -> Self {
        NodeSequence { nodes: (-(n as i64)..=n as i64).map(|j| j as f64).collect(), jitter: None }
    }

    pub fn new(nodes: Vec<f64>) -> Result<Self> {
        if nodes.len().is_multiple_of(2) {
            return Err(domain(format!("a symmetric section has odd length, got {}", nodes.len())));
        }
        if nodes.iter().any(|v| !v.is_finite()) {
            return Err(domain("nodes must be finite"));
        }
        if nodes.windows(2).any(|w| w[1] <= w[0]) {
            return Err(domain("nodes must be strictly increasing"));
        }
        Ok(NodeSequence { nodes, jitter: None })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// N for the section j = −N..N.
    pub fn half_len(&self) -> usize {
        self.nodes.len() / 2
    }

    /// Lattice index of position i.
    pub fn index(&self, i: usize) -> i64 {
        i as i64 - self.half_len() as i64
    }

    /// ℓ∞ size of the jitter that produced this sequence, if any.
    pub fn jitter(&self) -> Option<f64> {
        self.jitter
    }

    pub fn separation(&self) -> f64 {
        self.nodes.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min)
    }

    /// One node per line.
    pub fn to_text(&self) -> String {
        self.nodes.iter().map(|x| format!("{x:e}\n")).collect()
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut nodes = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let t = line.split('#').next().unwrap_or("").trim();
            if t.is_empty() {
                continue;
            }
            nodes.push(
                t.parse::<f64>().map_err(|e| Error::Parse { line: i + 1, message: format!("bad node '{t}': {e}") })?,
            );
        }
        Self::new(nodes)
    }
}

/// sup_j |x_j − j|.
pub fn kadec_margin(ns: &NodeSequence) -> f64 {
    ns.nodes.iter().enumerate().map(|(i, x)| (x - ns.index(i) as f64).abs()).fold(0.0, f64::max)
}

/// Frame bounds A ≤ B of A‖f‖² ≤ Σ|f(x_j)|² ≤ B‖f‖².
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FrameBounds {
    pub lower: f64,
    pub upper: f64,
}

impl FrameBounds {
    pub fn new(lower: f64, upper: f64) -> Result<Self> {
        if !(lower > 0.0 && lower <= upper && upper.is_finite()) {
            return Err(domain(format!("frame bounds need 0 < A <= B, got A = {lower}, B = {upper}")));
        }
        Ok(FrameBounds { lower, upper })
    }
}

/// π^{−1} ln(√(A/B) + 1).
pub fn perturbation_budget(fb: &FrameBounds) -> f64 {
    ((fb.lower / fb.upper).sqrt() + 1.0).ln() / PI
}

/// (A(1 − √C)², B(1 + √C)²) with C = (B/A)(e^{πL} − 1)².
pub fn perturbed_frame_bounds(fb: &FrameBounds, magnitude: f64) -> Result<FrameBounds> {
    if !(magnitude >= 0.0) || !magnitude.is_finite() {
        return Err(domain(format!("perturbation size must be nonnegative, got {magnitude}")));
    }
    let budget = perturbation_budget(fb);
    if magnitude >= budget {
        return Err(Error::BudgetExceeded { magnitude, budget });
    }
    let root_c = (fb.upper / fb.lower).sqrt() * (PI * magnitude).exp_m1();
    Ok(FrameBounds { lower: fb.lower * (1.0 - root_c).powi(2), upper: fb.upper * (1.0 + root_c).powi(2) })
}

/// Extreme eigenvalues of G_jk = sin(band (x_j − x_k)) / (π (x_j − x_k)), with
/// `probes` power and inverse iteration steps. These are finite-section
/// estimates, not certified bounds.
pub fn estimate_frame_bounds(ns: &NodeSequence, band: f64, probes: usize) -> Result<FrameBounds> {
    if !(band > 0.0 && band <= PI) {
        return Err(domain(format!("band must lie in (0, pi], got {band}")));
    }
    if probes == 0 {
        return Err(domain("at least one probe iteration is required"));
    }
    let sep = ns.separation();
    if ns.nodes.len() > 1 && sep < MIN_SEPARATION {
        return Err(Error::Separation(format!("minimum spacing {sep:e} is below {MIN_SEPARATION:e}")));
    }
    let x = &ns.nodes;
    let g = symmetric_from_fn(x.len(), |i, j| {
        if i == j {
            band / PI
        } else {
            let d = x[i] - x[j];
            (band * d).sin() / (PI * d)
        }
    });
    let factor = SymmetricFactor::new(&g);
    let start: Vec<f64> = x.iter().map(|&v| 1.0 + 0.5 * (1.7 * v + 0.3).sin()).collect();
    let (hi, lo) = extreme_eigenvalues(&g, &factor, &start, probes, 1e-12);
    let upper = hi.max(lo);
    let lower = if lo.is_finite() && lo > 0.0 { lo.min(upper) } else { f64::EPSILON * upper };
    FrameBounds::new(lower, upper)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum JitterPattern {
    /// Independent offsets uniform in [−L, L].
    UniformRandom,
    /// ε_j = L(−1)^j.
    Alternating,
    /// ±L at the listed lattice indices, alternating in sign; all other nodes unchanged.
    FiniteSupport { indices: Vec<i64> },
}

impl JitterPattern {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "uniform" | "uniform-random" => Ok(JitterPattern::UniformRandom),
            "alternating" => Ok(JitterPattern::Alternating),
            "finite-support" | "finite" => Ok(JitterPattern::FiniteSupport { indices: vec![-1, 0, 1] }),
            other => Err(Error::Config(format!("unknown jitter pattern '{other}'"))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            JitterPattern::UniformRandom => "uniform",
            JitterPattern::Alternating => "alternating",
            JitterPattern::FiniteSupport { .. } => "finite-support",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JitterSpec {
    pub magnitude: f64,
    pub seed: u64,
    pub pattern: JitterPattern,
}

pub fn apply_jitter(ns: &NodeSequence, spec: &JitterSpec) -> Result<NodeSequence> {
    let l = spec.magnitude;
    if !(l >= 0.0) || !l.is_finite() {
        return Err(domain(format!("jitter magnitude must be nonnegative, got {l}")));
    }
    let n = ns.nodes.len();
    let offsets: Vec<f64> = match &spec.pattern {
        JitterPattern::UniformRandom => {
            let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
            (0..n).map(|_| if l > 0.0 { rng.random_range(-l..=l) } else { 0.0 }).collect()
        }
        JitterPattern::Alternating => (0..n).map(|i| if ns.index(i).rem_euclid(2) == 0 { l } else { -l }).collect(),
        JitterPattern::FiniteSupport { indices } => {
            let mut off = vec![0.0; n];
            for (k, &j) in indices.iter().enumerate() {
                let pos = j + ns.half_len() as i64;
                if pos < 0 || pos >= n as i64 {
                    return Err(domain(format!("jitter index {j} lies outside the section")));
                }
                off[pos as usize] = if k % 2 == 0 { l } else { -l };
            }
            off
        }
    };
    let nodes: Vec<f64> = ns.nodes.iter().zip(&offsets).map(|(x, e)| x + e).collect();
    if let Some(i) = nodes.windows(2).position(|w| w[1] <= w[0]) {
        return Err(Error::JitterTooLarge(format!(
            "nodes {} and {} cross after jitter of size {l}",
            ns.index(i),
            ns.index(i + 1)
        )));
    }
    let achieved = offsets.iter().map(|e| e.abs()).fold(0.0, f64::max);
    Ok(NodeSequence { nodes, jitter: Some(achieved) })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NoiseDistribution {
    /// Standard normal draws rescaled to ℓ2 norm δ.
    Gaussian,
    /// A single entry of size δ at a random position.
    SingleSpike,
}

impl NoiseDistribution {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "gaussian" => Ok(NoiseDistribution::Gaussian),
            "single-spike" | "spike" => Ok(NoiseDistribution::SingleSpike),
            other => Err(Error::Config(format!("unknown noise distribution '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub delta: f64,
    pub seed: u64,
    pub distribution: NoiseDistribution,
}

/// values + noise with ‖noise‖₂ = δ.
pub fn apply_noise(values: &[f64], spec: &NoiseSpec) -> Result<Vec<f64>> {
    let delta = spec.delta;
    if !(delta >= 0.0) || !delta.is_finite() {
        return Err(domain(format!("noise level must be nonnegative, got {delta}")));
    }
    if delta == 0.0 || values.is_empty() {
        return Ok(values.to_vec());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let noise: Vec<f64> = match spec.distribution {
        NoiseDistribution::Gaussian => {
            let raw: Vec<f64> = (0..values.len()).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
            let norm = raw.iter().map(|v| v * v).sum::<f64>().sqrt();
            raw.iter().map(|v| v * (delta / norm)).collect()
        }
        NoiseDistribution::SingleSpike => {
            let at = rng.random_range(0..values.len());
            (0..values.len()).map(|i| if i == at { delta } else { 0.0 }).collect()
        }
    };
    Ok(values.iter().zip(&noise).map(|(v, e)| v + e).collect())
}
