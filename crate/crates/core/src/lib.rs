//! Numerical toolkit for plane fields and rough vector fields: sampled
//! seminorms, adaptive flows and their distortion, Lie brackets and
//! involutivity, and flow-box charts of involutive plane fields.

pub mod calculus;
pub mod catalog;
pub mod chart;
pub mod distortion;
pub mod domain;
pub mod error;
pub mod expr;
pub mod field;
pub mod flow;
pub mod io;
pub mod linalg;
pub mod plane;
pub mod seminorms;

pub use catalog::{load_catalog, Definition};
pub use chart::{build_chart, chart_forward, chart_inverse, trace_slice, Chart, ChartConfig, SliceMesh};
pub use domain::DomainBox;
pub use error::{Error, ErrorClass, Result};
pub use field::VectorField;
pub use flow::{FlowMap, FlowSettings, Trajectory};
pub use plane::PlaneField;
pub use seminorms::{SamplingConfig, SeminormEstimate, SeminormKind};
