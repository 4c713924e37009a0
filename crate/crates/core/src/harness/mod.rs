//! Batch evaluation: configuration, dataset I/O, scoring runs and reports.

pub mod aggregate;
pub mod config;
pub mod dataset;
pub mod report;
pub mod run;

pub use aggregate::{aggregate, AggregateReport, Judgment};
pub use config::{ConfigError, OutputFormat, RunConfig};
pub use dataset::{load_dataset, load_outputs, DatasetError, ModelOutputs};
pub use report::{render, render_judge};
pub use run::{evaluate_record, run_eval, InstanceRecord, RunError};
