//! Configuration-driven sweeps over monitored quantum Otto cycles.
//!
//! `run` writes one CSV row per sweep point with the average work, its
//! variance, the average hot heat, the divergence of the steady state from
//! the cold Gibbs state and its coherence for each requested scheme. `dist`
//! writes the work distribution of a single scheme.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod run;

pub use config::RunConfig;
pub use error::{CliError, CliResult};
pub use run::{distribution_csv, emit_distribution, load_config, run_sweep, sweep_csv};
