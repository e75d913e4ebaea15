//! Test functions, error norms, rate fits and the convergence studies.

mod functions;
mod norms;
mod rate;
mod studies;

pub use functions::{Smoothness, TestFunction, TestKind};
pub use norms::{error_norms, ErrorReport};
pub use rate::{fit_log_errors, fit_rate, RateFit};
pub use studies::{
    run_c_convergence, run_conditioning_study, run_h_convergence, run_jitter_study, run_noise_floor, CConvergence,
    CConvergenceConfig, CRow, Check, ConditioningConfig, ConditioningRow, ConditioningStudy, FiniteSupportRun,
    HConvergence, HConvergenceConfig, HRow, JitterConfig, JitterRow, JitterStudy, NoiseConfig, NoiseRow, NoiseStudy,
    StudyOutput, TableSource,
};
