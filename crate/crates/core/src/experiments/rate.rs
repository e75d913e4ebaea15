use crate::error::{Error, Result};
use serde::Serialize;

const MIN_POINTS: usize = 4;

/// Least-squares line y ≈ slope·x + intercept.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub points: Vec<(f64, f64)>,
}

pub fn fit_rate(points: &[(f64, f64)]) -> Result<RateFit> {
    let pts: Vec<(f64, f64)> = points.iter().copied().filter(|(x, y)| x.is_finite() && y.is_finite()).collect();
    if pts.len() < MIN_POINTS {
        return Err(Error::InsufficientData(format!("{} finite points, at least {MIN_POINTS} required", pts.len())));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return Err(Error::InsufficientData("all abscissae coincide".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_tot: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    let ss_res: f64 = pts.iter().map(|p| (p.1 - slope * p.0 - intercept).powi(2)).sum();
    let r_squared = if ss_tot > 0.0 { 1.0 - ss_res / ss_tot } else { 1.0 };
    Ok(RateFit { slope, intercept, r_squared, points: pts })
}

/// Fit of ln(error) against x, dropping errors below `floor`.
pub fn fit_log_errors(xs: &[f64], errors: &[f64], floor: f64) -> Result<RateFit> {
    let pts: Vec<(f64, f64)> =
        xs.iter().zip(errors).filter(|(_, &e)| e >= floor && e.is_finite()).map(|(&x, &e)| (x, e.ln())).collect();
    fit_rate(&pts)
}
