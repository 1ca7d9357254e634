//! Config parsing and the on-disk bundle format.

pub mod bundle;
pub mod config;
pub mod tables;

pub use bundle::{analyze, read_bundle, write_bundle, write_sweep_bundle, Analysis, Bundle, Metadata, Provenance};
pub use config::{apply_overrides, parse_config, parse_override, parse_scenario_config};
