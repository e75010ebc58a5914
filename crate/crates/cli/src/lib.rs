//! Configuration, presets and output writers for the `phonon-gauge` binary.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod run;

pub use config::{
    parse_config, preset_document, ConfigError, ConfigErrors, Experiment, ExperimentConfig, Format,
    Value,
};
pub use run::{run_experiment, run_to_directory, OutputFile, Outputs, RunError, MANIFEST};

/// Overrides the output directory given on the command line or in the config.
pub const OUTPUT_DIR_ENV: &str = "PHONON_GAUGE_OUTPUT_DIR";
