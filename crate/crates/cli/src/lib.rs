//! End-to-end extremal dependence pipeline: configuration, stages that
//! persist their intermediates, and text tables in the usual published layout.

pub mod config;
pub mod error;
pub mod pipeline;
pub mod tables;

pub use config::PipelineConfig;
pub use error::{CliError, Result};
pub use pipeline::{run_pipeline, Manifest};
