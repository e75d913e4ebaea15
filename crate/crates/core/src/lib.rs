//! Interpolation by translates of general multiquadric, Poisson and Gaussian
//! kernels through FFT-built cardinal functions.

pub mod cardinal;
pub mod cli;
pub mod error;
pub mod experiments;
pub mod interpolation;
pub mod kernels;
mod linalg;
pub mod sampling;

pub use cardinal::{CardinalTable, TruncationPlan};
pub use error::{Error, Result};
pub use interpolation::{GramInterpolant, SampleSet, UniformInterpolant};
pub use kernels::{Kernel, KernelFamily, KernelSpec};
