//! Tables, charts, run configuration and the end-to-end pipeline.

pub mod chart;
pub mod config;
pub mod pipeline;
pub mod tables;

pub use chart::{fmt_num, render_chart, ChartData, ChartError, ChartSpec, ScatterPoint};
pub use config::{ConfigError, RunConfig, RunOverrides, ValidatedConfig};
pub use pipeline::{run_pipeline, Artifact, Manifest, PipelineError};
