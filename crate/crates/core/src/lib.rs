//! Heat kernel signatures of pathlines in unsteady flow.
//!
//! Pathlines are treated as points in a high-dimensional space. A local
//! Voronoi volume estimate and a heat-kernel affinity give a discrete
//! Laplace-Beltrami operator whose spectrum yields a per-pathline signature
//! over a range of scales.

pub mod analysis;
pub mod error;
pub mod flowfield;
pub mod hks;
pub mod lbo;
pub mod neighborhood;
pub mod pipeline;
mod textio;

pub use error::{Error, Result};
pub use pipeline::{run_pipeline, PipelineConfig, PipelineOutput, StageTimings};
