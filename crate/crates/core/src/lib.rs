//! Temporal characterization of discussion topics.
//!
//! Daily activity counts become topic distribution vectors ([`tdv`]), which
//! are compared with distribution distances ([`metrics`]) after optional
//! shift alignment ([`align`]), grouped with HDBSCAN ([`cluster`]), and
//! scored for how short-lived their attention is ([`ephemeral`]).
//! [`synth`] generates labeled test topics and [`pipeline`] runs the whole
//! chain over input files.

pub mod align;
pub mod cluster;
pub mod ephemeral;
pub mod error;
pub mod metrics;
pub mod pipeline;
pub mod synth;
pub mod tdv;

pub use align::{align, aligned_distance, Alignment};
pub use cluster::{ClusterResult, DistanceMatrix, Hdbscan, NOISE};
pub use ephemeral::{assess, Category, EphemeralityParams, EphemeralityReport, Orientation};
pub use error::{Error, Result};
pub use metrics::MetricKind;
pub use pipeline::{run, PipelineConfig};
pub use tdv::{Preprocess, Tdv, TopicSeries};
