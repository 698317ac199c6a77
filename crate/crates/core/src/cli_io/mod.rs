//! Configuration, file formats and the command driver behind the
//! `resistwalk` binary.

mod config;
mod graph_io;
mod manifest;
mod run;

pub use config::{
    default_lambda_grid, parse_config, parse_config_for, Command, ExperimentConfig, ExperimentKind,
    ExperimentSection, GraphSource, OracleConfig, ValidateConfig, WalkConfig, DEFAULT_OUTPUT_DIR, OUTPUT_DIR_ENV,
    SCHEMA_VERSION,
};
pub use graph_io::{export_graph, graph_from_json, graph_to_json, import_graph};
pub use manifest::{sha256_hex, write_atomic, OutputSet, RunManifest, MANIFEST_FILE};
pub use run::{run_command, run_command_in, ALL_PAIR_IDENTITY_LIMIT, METRIC_CHECK_LIMIT};
