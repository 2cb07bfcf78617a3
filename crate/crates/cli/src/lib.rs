//! Parameter sweeps over the nesslab models, written as CSV with a JSON
//! summary.

pub mod config;
pub mod experiments;
pub mod output;

pub use config::{parse_config, validate_config, AxisSpec, ConfigErrors, Experiment, SweepConfig};
pub use experiments::run;
pub use output::{format_float, Column, Row, Status, SweepResult};
