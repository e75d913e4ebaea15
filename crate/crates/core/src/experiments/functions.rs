use crate::error::{domain, Result};
use serde::Serialize;
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum TestKind {
    /// (σ/2π)(sin(σx/2)/(σx/2))², spectrum max(0, 1 − |ξ|/σ).
    FejerBandlimited { sigma: f64 },
    /// sin(σx)/(πx), spectrum 1 on [−σ, σ].
    DilatedSinc { sigma: f64 },
    /// Cardinal B-spline of degree p rescaled to [−1, 1].
    BSpline { degree: usize },
    /// exp(−1/(1 − x²)) on (−1, 1).
    Bump,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Smoothness {
    Sobolev(usize),
    Band(f64),
    Infinite,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TestFunction {
    pub kind: TestKind,
    pub amplitude: f64,
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

fn factorial(n: usize) -> f64 {
    (1..=n).fold(1.0, |acc, i| acc * i as f64)
}

/// Cardinal B-spline of degree p on [0, p + 1].
fn cardinal_bspline(p: usize, t: f64) -> f64 {
    let support = (p + 1) as f64;
    if t <= 0.0 || t >= support {
        return 0.0;
    }
    let t = t.min(support - t);
    let mut acc = 0.0;
    for i in 0..=(t.floor() as usize) {
        let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
        acc += sign * binomial(p + 1, i) * (t - i as f64).powi(p as i32);
    }
    acc / factorial(p)
}

fn sinc(z: f64) -> f64 {
    if z.abs() < 1e-8 {
        1.0 - z * z / 6.0
    } else {
        z.sin() / z
    }
}

impl TestFunction {
    pub fn fejer(sigma: f64) -> Result<Self> {
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(domain(format!("band must be positive, got {sigma}")));
        }
        Ok(TestFunction { kind: TestKind::FejerBandlimited { sigma }, amplitude: 1.0 })
    }

    pub fn sinc(sigma: f64) -> Result<Self> {
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(domain(format!("band must be positive, got {sigma}")));
        }
        Ok(TestFunction { kind: TestKind::DilatedSinc { sigma }, amplitude: 1.0 })
    }

    pub fn bspline(degree: usize) -> Result<Self> {
        if degree == 0 || degree > 20 {
            return Err(domain(format!("B-spline degree must lie in 1..=20, got {degree}")));
        }
        Ok(TestFunction { kind: TestKind::BSpline { degree }, amplitude: 1.0 })
    }

    pub fn bump() -> Self {
        TestFunction { kind: TestKind::Bump, amplitude: 1.0 }
    }

    pub fn scaled(self, amplitude: f64) -> Self {
        TestFunction { amplitude: self.amplitude * amplitude, ..self }
    }

    pub fn eval(&self, x: f64) -> f64 {
        let v = match self.kind {
            TestKind::FejerBandlimited { sigma } => sigma / (2.0 * PI) * sinc(0.5 * sigma * x).powi(2),
            TestKind::DilatedSinc { sigma } => sigma / PI * sinc(sigma * x),
            TestKind::BSpline { degree } => cardinal_bspline(degree, (x + 1.0) * (degree + 1) as f64 / 2.0),
            TestKind::Bump => {
                if x.abs() < 1.0 {
                    (-1.0 / (1.0 - x * x)).exp()
                } else {
                    0.0
                }
            }
        };
        self.amplitude * v
    }

    /// f̂(ξ) = ∫ f(x) e^{−ixξ} dx.
    pub fn spectrum(&self, xi: f64) -> f64 {
        let v = match self.kind {
            TestKind::FejerBandlimited { sigma } => (1.0 - xi.abs() / sigma).max(0.0),
            TestKind::DilatedSinc { sigma } => {
                if xi.abs() < sigma {
                    1.0
                } else if xi.abs() == sigma {
                    0.5
                } else {
                    0.0
                }
            }
            TestKind::BSpline { degree } => {
                let a = (degree + 1) as f64;
                2.0 / a * sinc(xi / a).powi(degree as i32 + 1)
            }
            TestKind::Bump => {
                // smooth and flat at ±1, so the trapezoid rule converges rapidly
                let n = 4096;
                let h = 2.0 / n as f64;
                (1..n)
                    .map(|i| {
                        let x = -1.0 + i as f64 * h;
                        (-1.0 / (1.0 - x * x)).exp() * (xi * x).cos()
                    })
                    .sum::<f64>()
                    * h
            }
        };
        self.amplitude * v
    }

    pub fn smoothness(&self) -> Smoothness {
        match self.kind {
            TestKind::FejerBandlimited { sigma } | TestKind::DilatedSinc { sigma } => Smoothness::Band(sigma),
            TestKind::BSpline { degree } => Smoothness::Sobolev(degree),
            TestKind::Bump => Smoothness::Infinite,
        }
    }

    /// |f|_{W₂ᵖ} = ‖f^{(p)}‖_{L₂} for B-splines of degree p.
    pub fn seminorm(&self) -> Option<f64> {
        match self.kind {
            TestKind::BSpline { degree: p } => {
                let a = (p + 1) as f64 / 2.0;
                let mut sum = 0.0;
                let mut partial = 0.0;
                for m in 0..=p {
                    let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
                    partial += sign * binomial(p + 1, m);
                    sum += partial * partial;
                }
                Some(self.amplitude.abs() * (a.powi(2 * p as i32) * sum / a).sqrt())
            }
            _ => None,
        }
    }

    /// ‖f‖_{L₂}, where a closed form is available.
    pub fn l2_norm(&self) -> Option<f64> {
        let sq = match self.kind {
            TestKind::FejerBandlimited { sigma } => sigma / (3.0 * PI),
            TestKind::DilatedSinc { sigma } => sigma / PI,
            TestKind::BSpline { degree: p } => {
                // the autocorrelation of B_p is B_{2p+1}, centred at p + 1
                2.0 / (p + 1) as f64 * cardinal_bspline(2 * p + 1, (p + 1) as f64)
            }
            TestKind::Bump => return None,
        };
        Some(self.amplitude.abs() * sq.sqrt())
    }

    pub fn label(&self) -> String {
        match self.kind {
            TestKind::FejerBandlimited { sigma } => format!("fejer(sigma={sigma})"),
            TestKind::DilatedSinc { sigma } => format!("sinc(sigma={sigma})"),
            TestKind::BSpline { degree } => format!("bspline(p={degree})"),
            TestKind::Bump => "bump".into(),
        }
    }
}
