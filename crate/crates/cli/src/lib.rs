//! Scenario files, closed-loop runs and their CSV and SVG outputs.

pub mod config;
pub mod error;
pub mod output;
pub mod plot;
pub mod series;

pub use config::{load_config, parse_config, Scenario};
pub use error::Error;
pub use output::{write_csv, write_csv_to};
pub use plot::render_plots;
pub use series::{run_scenario, TimeSeries, COLUMNS};
