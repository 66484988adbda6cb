//! Sweeps the cache size or the correlation profile and reports the lower
//! bound next to the superposition, piggyback and correlation-ignorant
//! schemes.

pub mod config;
pub mod output;
pub mod run;
pub mod verify;

pub use config::{preset_names, ConfigError, ExperimentConfig, Sweep};
pub use output::{emit_csv, parse_csv, read_csv, write_csv, OutputError};
pub use run::{run_experiment, CurvePoint};
pub use verify::{verify_command, VerifyOutcome};
