//! File formats, parallel drivers and the command-line pipeline for
//! weather-weighted visibility graphs. The geometry and numerics live in
//! [`weathervis_core`], re-exported here as [`core`].

pub use weathervis_core as core;

pub mod config;
pub mod error;
pub mod formats;
pub mod heatmap;
pub mod obj;
pub mod parallel;
pub mod pipeline;
pub mod scenes;
pub mod stages;

pub use crate::config::{ConditionArg, GraphFormat, Metric, RunConfig, ScaleMode};
pub use crate::error::{Error, Result};
pub use crate::pipeline::{query_points, run_pipeline};
