//! Evaluation and benchmarking for vulnerable-road-user detectors.
//!
//! The crate works on annotation and prediction files, never on models:
//!
//! - [`geometry`]: boxes, normalization and IoU.
//! - [`annotation`]: VisDrone/YOLO parsing, class remapping, conversion and
//!   dataset statistics.
//! - [`metrics`]: greedy matching, precision/recall/F1, PR curves, AP, mAP.
//! - [`benchmark`]: cross-model comparison, throughput budgeting and
//!   continual-learning scenarios.

pub mod annotation;
pub mod benchmark;
pub mod error;
pub mod geometry;
pub mod metrics;
pub mod table;

pub use error::{Error, Result};
