//! Hypertension screening from photoplethysmogram (PPG) windows.
//!
//! The crate is organised by pipeline stage:
//!
//! * [`signal`]: records, datasets, file formats, subject-level splits and a
//!   synthetic PPG generator.
//! * [`rocket`]: the fixed 84-kernel random-convolution transform with
//!   quantile biases and proportion-of-positive-values pooling.
//! * [`features`]: AMPD peak detection, heart rate and pulse morphology.
//! * [`classify`]: class-balanced ridge and balanced random forest.
//! * [`metrics`]: confusion matrix and support-weighted report.
//!
//! Data-parallel loops honour [`Parallelism`]; the `parallel` cargo feature
//! (on by default) enables the rayon backend.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod classify;
mod codec;
pub mod error;
pub mod exec;
pub mod features;
pub mod matrix;
pub mod metrics;
pub mod rocket;
pub mod signal;

pub use error::{Error, Result};
pub use exec::Parallelism;
pub use matrix::FeatureMatrix;
