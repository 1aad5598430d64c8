//! Scenario files, result export and the `navsim` command-line tool built on
//! `navsim-core`.

pub mod cli;
pub mod field;
pub mod output;
pub mod scenario;
pub mod svg;

pub use scenario::{load_scenario, parse_scenario, scenario_to_toml, ScenarioError};
