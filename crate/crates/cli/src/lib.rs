//! Experiment configuration, scenario presets and artifact output for the
//! `graphblow` command-line tool.

pub mod config;
pub mod output;
pub mod plotdata;
pub mod presets;

pub use config::{config_hash, ExperimentConfig, SolverConfig, DEFAULT_SEED};
pub use output::{Envelope, OutDir, VERSION};
pub use plotdata::emit_plotdata;
pub use presets::{run_scenario, ScenarioReport, UnknownPreset, PRESETS};
