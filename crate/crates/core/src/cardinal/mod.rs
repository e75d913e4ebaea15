//! Truncated periodization, the cardinal transform, and DFT-built tables of the
//! cardinal function.

mod plan;
mod table;

pub use plan::{
    cardinal_hat, compute_tau, ln_periodized_symbol, periodized_symbol, periodized_symbol_lower_bound,
    reduce_frequency, TauRule, TruncationPlan,
};
pub use table::{build_cardinal_table, build_cardinal_table_with, CardinalTable, TableDiagnostics, TableOptions};
