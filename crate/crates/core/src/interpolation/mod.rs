//! The uniform cardinal series and the classical Gram-system interpolant.

mod gram;
mod samples;
mod uniform;

pub use gram::{fit_gram, fit_gram_with, gram_condition, GramInterpolant, GramOptions};
pub use samples::SampleSet;
pub use uniform::{fit_uniform, UniformInterpolant};
