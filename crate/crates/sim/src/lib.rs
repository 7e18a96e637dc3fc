//! Experiment runner for the distributed primal-dual SGD simulator.
//!
//! Reads TOML experiment configurations, builds the network and problem,
//! executes the requested algorithms over a list of seeds, and writes one
//! CSV trace per run plus a summary. Also reads and writes the plain-text
//! graph format and header-free dataset CSVs.

pub mod config;
pub mod dataset_csv;
pub mod error;
pub mod experiment;
pub mod graph_file;
pub mod summarize;
pub mod trace;

pub use config::{load_config, parse_config, ExperimentConfig, LoadedConfig};
pub use error::{Result, SimError};
pub use experiment::{plan, Experiment, PlannedRun, RunResult, RunStatus};
pub use summarize::{format_table, summarize_dir, GroupSummary};
