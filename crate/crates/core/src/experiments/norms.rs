use super::functions::TestFunction;
use crate::error::{domain, Error, Result};
use serde::Serialize;

const SELF_CHECK_LIMIT: f64 = 0.05;

/// Windowed L2 and sup errors on [−T, T].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ErrorReport {
    pub l2_window: f64,
    pub sup_window: f64,
    pub window: f64,
    pub step: f64,
    /// Relative change of the L2 error when the step is halved.
    pub self_check: f64,
    pub self_check_ok: bool,
    /// L2 mass outside the window if the error decays like |x|^{-2} from its
    /// value at ±T.
    pub tail_estimate: Option<f64>,
}

fn simpson_pass(f: &TestFunction, g: &dyn Fn(f64) -> f64, window: f64, intervals: usize) -> Result<(f64, f64)> {
    let h = 2.0 * window / intervals as f64;
    let mut acc = 0.0;
    let mut sup: f64 = 0.0;
    for i in 0..=intervals {
        let x = -window + i as f64 * h;
        let gx = g(x);
        if !gx.is_finite() {
            return Err(Error::Evaluation { x });
        }
        let d = f.eval(x) - gx;
        sup = sup.max(d.abs());
        let w = if i == 0 || i == intervals {
            1.0
        } else if i % 2 == 1 {
            4.0
        } else {
            2.0
        };
        acc += w * d * d;
    }
    Ok(((acc * h / 3.0).max(0.0).sqrt(), sup))
}

/// Composite Simpson estimate of ‖f − g‖ on [−T, T] with the given step, plus
/// a self-check at half the step.
pub fn error_norms(f: &TestFunction, g: impl Fn(f64) -> f64, window: f64, step: f64) -> Result<ErrorReport> {
    if !(window > 0.0 && window.is_finite()) || !(step > 0.0 && step.is_finite()) {
        return Err(domain(format!("window and step must be positive, got T = {window}, step = {step}")));
    }
    let mut intervals = (2.0 * window / step).round().max(2.0) as usize;
    if intervals % 2 == 1 {
        intervals += 1;
    }
    let (l2, sup) = simpson_pass(f, &g, window, intervals)?;
    let (l2_fine, _) = simpson_pass(f, &g, window, 2 * intervals)?;
    let edge = [-window, window].iter().map(|&x| (f.eval(x) - g(x)).abs()).fold(0.0, f64::max);
    let scale = l2.max(l2_fine);
    let self_check = if scale > 0.0 { (l2 - l2_fine).abs() / scale } else { 0.0 };
    Ok(ErrorReport {
        l2_window: l2,
        sup_window: sup,
        window,
        step: 2.0 * window / intervals as f64,
        self_check,
        self_check_ok: self_check < SELF_CHECK_LIMIT,
        tail_estimate: Some(edge * (2.0 * window / 3.0).sqrt()),
    })
}
