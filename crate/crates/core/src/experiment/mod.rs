//! JSON-configured experiments and their persisted run records.

mod config;
mod run;

pub use config::{
    validate_config, AuxKind, ControllerKind, ExperimentConfig, ExperimentKind, IdentifierKind, PlugInKind,
};
pub use run::{config_hash, run_experiment, CsvFile, RunRecord};
