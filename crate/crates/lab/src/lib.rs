//! Experiment runner for `libor-core`: TOML configs, CSV curves and outputs,
//! chunked parallel Monte Carlo and the `compare`, `verify`, `price` and
//! `calibrate-mfm` commands.

pub mod config;
pub mod error;
pub mod experiment;
pub mod io;
pub mod runner;

pub use config::{ExperimentConfig, ModelKind, Overrides};
pub use error::LabError;
pub use experiment::{run_calibrate_mfm, run_compare, run_price, run_verify, Outcome};
