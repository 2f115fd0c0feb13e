//! Experiment orchestration: config files, single runs and grids.

mod config;
mod grid;
mod run;

pub use config::{DataSection, ExperimentConfig, ModelSection, OutputSection, TrainSection};
pub use grid::{run_grid, GridCell, GridReport, GridSpec};
pub use run::{prepare_data, run_experiment, run_prepared, ExperimentResult, PreparedData, ResultRow};
