//! Synthetic data models, Monte Carlo risk estimation, config handling, file formats and the
//! studies driven by the command-line tool.

pub mod config;
pub mod data;
pub mod io;
pub mod montecarlo;
pub mod studies;

pub use config::{FilterName, GridSpec, LossChoice, ModelKind, StudyConfig};
pub use data::{DataModel, ImageSource, Instance, ModelSampler};
pub use io::{read_dataset, write_dataset, Dataset, Table};
pub use montecarlo::{RiskProfile, Summary};
pub use studies::StudyKind;
