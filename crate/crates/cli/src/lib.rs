//! Configuration-driven batch runs of the HEOM engine.
// Negated float comparisons reject NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod build;
pub mod config;
pub mod describe;
pub mod error;
pub mod oracles;
pub mod run;

pub use config::{parse_config, RunConfig};
pub use error::CliError;
pub use run::{count_only, run, RunOptions, RunSummary};

/// Bundled configuration of the single-impurity Anderson model.
pub const EXAMPLE1: &str = include_str!("../configs/example1.json");
/// Bundled configuration of the charge-cavity system.
pub const EXAMPLE2: &str = include_str!("../configs/example2.json");
