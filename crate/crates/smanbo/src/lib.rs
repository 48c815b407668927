//! Closed-loop simulation, experiment batches and file formats on top of
//! [`smanbo_core`].
//!
//! * [`sim::run_trial`] runs one two-rate tracking trial with a chosen planner,
//! * [`experiment::run_experiment`] sweeps maps, horizons and planners and
//!   writes CSV logs, a summary and OSPA ECDFs,
//! * [`mapfile`] and [`config`] read and write forests and TOML experiment
//!   files.

pub mod config;
pub mod error;
pub mod experiment;
pub mod mapfile;
pub mod output;
pub mod sim;

pub use config::{parse_config, parse_config_str, render_config, ExperimentSpec, Sweep};
pub use error::{ConfigError, Error, Result};
pub use experiment::run_experiment;
pub use mapfile::{load_map, save_map, MapFile};
pub use sim::{run_scenario, run_trial, PlannerKind, Scenario, Timing, TrialLog};
