//! Command-line orchestration for the ppg-rocket toolkit: corpus synthesis,
//! training, evaluation, training-fraction ablation and feature dumps.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod error;
pub mod pipeline;

pub use config::RunConfig;
pub use error::{CliError, CliResult, ErrorKind};
pub use pipeline::{fit_pipeline, FitOptions, Method, Pipeline, Predictor};
