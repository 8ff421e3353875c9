//! Experiment runner: configuration, single-point pipelines, sweeps over the
//! regularization grids, intersectional audits, and result files.

pub mod config;
pub mod intersect;
pub mod lab;
pub mod pipeline;
pub mod results;
pub mod sweep;

pub use config::{
    EncoderEntry, ExperimentConfig, ModelConfig, ModelFamily, OutputFormat, SweepParam,
};
pub use intersect::{run_intersectional, IntersectFlag, IntersectReport};
pub use lab::{run_lab, LabReport};
pub use pipeline::{run_pipeline, run_point, PointStatus, Prepared, SweepRecord};
pub use results::{emit_results, read_results, ResultDocument};
pub use sweep::{run_audit, run_sweep, sweep_points, SweepPoint};
