//! Radial kernels and their Fourier transforms, f̂(ξ) = ∫ f(x) e^{−ixξ} dx.

mod bessel;
mod gamma;

pub use bessel::{
    bessel_k, bessel_k_scaled, bessel_k_scaled_quadrature, bessel_k_upper_bound, ln_bessel_k, ln_bessel_k_upper_bound,
};
pub use gamma::{gamma, ln_gamma};

use crate::error::{domain, Error, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KernelFamily {
    Multiquadric,
    Poisson,
    Gaussian,
}

impl KernelFamily {
    pub fn name(self) -> &'static str {
        match self {
            KernelFamily::Multiquadric => "multiquadric",
            KernelFamily::Poisson => "poisson",
            KernelFamily::Gaussian => "gaussian",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "multiquadric" | "mq" | "general-multiquadric" => Ok(KernelFamily::Multiquadric),
            "poisson" => Ok(KernelFamily::Poisson),
            "gaussian" => Ok(KernelFamily::Gaussian),
            other => Err(Error::Config(format!("unknown kernel family '{other}'"))),
        }
    }
}

impl fmt::Display for KernelFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A radial kernel: (x² + c²)^α, the α = −1 Poisson case, or e^{−λx²}.
#[derive(Debug, Clone, Copy)]
pub struct Kernel {
    family: KernelFamily,
    alpha: f64,
    shape: f64,
}

fn check_shape(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(domain(format!("{name} must be finite and positive, got {v}")))
    }
}

impl Kernel {
    pub fn multiquadric(alpha: f64, c: f64) -> Result<Self> {
        if !alpha.is_finite() {
            return Err(domain(format!("alpha must be finite, got {alpha}")));
        }
        check_shape("c", c)?;
        Ok(Kernel { family: KernelFamily::Multiquadric, alpha, shape: c })
    }

    pub fn poisson(c: f64) -> Result<Self> {
        check_shape("c", c)?;
        Ok(Kernel { family: KernelFamily::Poisson, alpha: -1.0, shape: c })
    }

    pub fn gaussian(lambda: f64) -> Result<Self> {
        check_shape("lambda", lambda)?;
        Ok(Kernel { family: KernelFamily::Gaussian, alpha: f64::NAN, shape: lambda })
    }

    /// Builds a kernel from a family and its parameters; `shape` is c or λ.
    pub fn new(family: KernelFamily, alpha: Option<f64>, shape: f64) -> Result<Self> {
        match family {
            KernelFamily::Multiquadric => {
                let alpha = alpha.ok_or_else(|| Error::Config("multiquadric requires alpha".into()))?;
                Kernel::multiquadric(alpha, shape)
            }
            KernelFamily::Poisson => match alpha {
                Some(a) if a != -1.0 => Err(Error::Config(format!("poisson kernel has alpha = -1, got {a}"))),
                _ => Kernel::poisson(shape),
            },
            KernelFamily::Gaussian => Kernel::gaussian(shape),
        }
    }

    pub fn family(&self) -> KernelFamily {
        self.family
    }

    /// Exponent α; `None` for the Gaussian.
    pub fn alpha(&self) -> Option<f64> {
        match self.family {
            KernelFamily::Gaussian => None,
            _ => Some(self.alpha),
        }
    }

    /// c for multiquadric and Poisson kernels, λ for the Gaussian.
    pub fn shape(&self) -> f64 {
        self.shape
    }

    /// Bessel order α + 1/2 of the multiquadric transform.
    pub fn nu(&self) -> Option<f64> {
        self.alpha().map(|a| a + 0.5)
    }

    /// The Poisson kernel viewed as the α = −1 multiquadric.
    pub fn as_multiquadric(&self) -> Self {
        match self.family {
            KernelFamily::Poisson => Kernel { family: KernelFamily::Multiquadric, ..*self },
            _ => *self,
        }
    }

    /// Kernel whose unit-spaced cardinal series equals the level-`n` series of this
    /// kernel after the substitution x → n·x: c ↦ n·c, λ ↦ λ/n².
    pub fn dilated(&self, n: f64) -> Self {
        match self.family {
            KernelFamily::Gaussian => Kernel { shape: self.shape / (n * n), ..*self },
            _ => Kernel { shape: self.shape * n, ..*self },
        }
    }

    /// Parameter equality up to a relative tolerance.
    pub fn approx_eq(&self, other: &Kernel, rel: f64) -> bool {
        let close = |a: f64, b: f64| (a - b).abs() <= rel * a.abs().max(b.abs());
        self.family == other.family
            && close(self.shape, other.shape)
            && (self.family == KernelFamily::Gaussian || close(self.alpha, other.alpha))
    }

    /// Short identifier for file names, e.g. `poisson-c1`.
    pub fn tag(&self) -> String {
        match self.family {
            KernelFamily::Multiquadric => format!("mq-a{}-c{}", self.alpha, self.shape),
            KernelFamily::Poisson => format!("poisson-c{}", self.shape),
            KernelFamily::Gaussian => format!("gaussian-l{}", self.shape),
        }
    }

    pub fn spatial(&self, x: f64) -> f64 {
        match self.family {
            KernelFamily::Gaussian => (-self.shape * x * x).exp(),
            KernelFamily::Poisson => 1.0 / (x * x + self.shape * self.shape),
            KernelFamily::Multiquadric => (x * x + self.shape * self.shape).powf(self.alpha),
        }
    }

    fn require_transformable(&self) -> Result<()> {
        if self.family == KernelFamily::Multiquadric && self.alpha >= 0.0 {
            return Err(Error::Unsupported(format!(
                "the Fourier transform of a multiquadric with alpha = {} >= 0 is not a function",
                self.alpha
            )));
        }
        Ok(())
    }

    /// ln φ̂(ξ). For the generic multiquadric branch ξ must be nonzero.
    pub fn ln_fourier(&self, xi: f64) -> Result<f64> {
        if !xi.is_finite() {
            return Err(domain(format!("non-finite frequency {xi}")));
        }
        self.require_transformable()?;
        let c = self.shape;
        let ax = xi.abs();
        match self.family {
            KernelFamily::Poisson => Ok((PI / c).ln() - c * ax),
            KernelFamily::Gaussian => Ok(0.5 * (PI / self.shape).ln() - xi * xi / (4.0 * self.shape)),
            KernelFamily::Multiquadric => {
                if ax == 0.0 {
                    return Err(Error::Singularity(if self.alpha < -0.5 {
                        "generic multiquadric transform at xi = 0; use the zero limit".into()
                    } else {
                        format!("multiquadric transform diverges at xi = 0 for alpha = {}", self.alpha)
                    }));
                }
                let a = self.alpha;
                let nu = a + 0.5;
                Ok(0.5 * (2.0 * PI).ln() + (1.0 + a) * 2f64.ln() - ln_gamma(-a)
                    + nu * (c.ln() - ax.ln())
                    + ln_bessel_k(nu, c * ax)?)
            }
        }
    }

    pub fn fourier(&self, xi: f64) -> Result<f64> {
        if !xi.is_finite() {
            return Err(domain(format!("non-finite frequency {xi}")));
        }
        self.require_transformable()?;
        let c = self.shape;
        let direct = match self.family {
            KernelFamily::Poisson => PI / c * (-c * xi.abs()).exp(),
            KernelFamily::Gaussian => (PI / c).sqrt() * (-xi * xi / (4.0 * c)).exp(),
            KernelFamily::Multiquadric => {
                if xi == 0.0 {
                    return self.ln_fourier(xi);
                }
                let a = self.alpha;
                let nu = a + 0.5;
                let r = c * xi.abs();
                (2.0 * PI).sqrt() * 2f64.powf(1.0 + a) / gamma(-a) * (c / xi.abs()).powf(nu) * bessel_k(nu, r)?
            }
        };
        if direct.is_normal() {
            Ok(direct)
        } else {
            Ok(self.ln_fourier(xi)?.exp())
        }
    }

    /// ln of lim_{ξ→0} φ̂(ξ).
    pub fn ln_fourier_at_zero(&self) -> Result<f64> {
        self.require_transformable()?;
        match self.family {
            KernelFamily::Poisson | KernelFamily::Gaussian => self.ln_fourier(0.0),
            KernelFamily::Multiquadric => {
                let a = self.alpha;
                if a >= -0.5 {
                    return Err(Error::Divergence(format!(
                        "multiquadric transform is unbounded at 0 for alpha = {a} >= -1/2"
                    )));
                }
                Ok(0.5 * PI.ln() + ln_gamma(-a - 0.5) - ln_gamma(-a) + (2.0 * a + 1.0) * self.shape.ln())
            }
        }
    }

    pub fn fourier_at_zero(&self) -> Result<f64> {
        Ok(self.ln_fourier_at_zero()?.exp())
    }

    /// φ̂(ξ), switching to the zero limit at ξ = 0.
    pub(crate) fn fourier_or_limit(&self, xi: f64) -> Result<f64> {
        if xi == 0.0 && self.family == KernelFamily::Multiquadric {
            Ok(self.ln_fourier_or_limit(xi)?.exp())
        } else {
            self.fourier(xi)
        }
    }

    /// ln φ̂(ξ), switching to the zero limit at ξ = 0.
    pub(crate) fn ln_fourier_or_limit(&self, xi: f64) -> Result<f64> {
        if xi == 0.0 && self.family == KernelFamily::Multiquadric {
            self.ln_fourier_at_zero().map_err(|e| match e {
                Error::Divergence(m) => Error::Singularity(m),
                other => other,
            })
        } else {
            self.ln_fourier(xi)
        }
    }
}

impl PartialEq for Kernel {
    fn eq(&self, other: &Self) -> bool {
        self.approx_eq(other, 0.0)
    }
}

impl fmt::Display for Kernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.family {
            KernelFamily::Multiquadric => write!(f, "multiquadric(alpha={}, c={})", self.alpha, self.shape),
            KernelFamily::Poisson => write!(f, "poisson(c={})", self.shape),
            KernelFamily::Gaussian => write!(f, "gaussian(lambda={})", self.shape),
        }
    }
}

/// Serializable kernel parameters as they appear in configs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelSpec {
    pub family: KernelFamily,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
}

impl KernelSpec {
    pub fn to_kernel(&self) -> Result<Kernel> {
        match self.family {
            KernelFamily::Gaussian => {
                if self.c.is_some() || self.alpha.is_some() {
                    return Err(Error::Config("gaussian kernel takes lambda only".into()));
                }
                Kernel::gaussian(self.lambda.unwrap_or(1.0))
            }
            family => {
                if self.lambda.is_some() {
                    return Err(Error::Config(format!("{family} kernel takes c, not lambda")));
                }
                Kernel::new(family, self.alpha, self.c.unwrap_or(1.0))
            }
        }
    }
}

impl From<Kernel> for KernelSpec {
    fn from(k: Kernel) -> Self {
        match k.family {
            KernelFamily::Gaussian => KernelSpec { family: k.family, alpha: None, c: None, lambda: Some(k.shape) },
            KernelFamily::Poisson => KernelSpec { family: k.family, alpha: None, c: Some(k.shape), lambda: None },
            KernelFamily::Multiquadric => {
                KernelSpec { family: k.family, alpha: Some(k.alpha), c: Some(k.shape), lambda: None }
            }
        }
    }
}
