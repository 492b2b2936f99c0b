//! Confidence calibration toolkit for multilingual question answering.
//!
//! The crate reads prediction logs produced by extractive (span) and
//! generative (sequence) QA models and turns them into calibrated
//! confidences and calibration metrics:
//!
//! - [`prediction_log`]: log formats, validation and language partitioning
//! - [`extraction`]: top-k answer spans from start/end logits
//! - [`scoring`]: candidate confidences, optionally temperature-scaled
//! - [`metrics`]: answer normalization, exact match, ECE, reliability tables
//! - [`calibrate`]: temperature fitting and label-smoothed targets
//! - [`corpus`]: training-mix manifests, in-context example selection, prompts
//! - [`analysis`]: per-language tables and correlation analyses
//! - [`report`]: table and reliability-diagram rendering
//! - [`cli`]: the `qacal` command line
//!
//! Runnable examples live in `examples/`:
//!
//! ```bash
//! cargo run --example span_extraction
//! cargo run --example temperature_fit
//! cargo run --example language_analysis
//! ```

pub mod analysis;
pub mod calibrate;
pub mod cli;
pub mod corpus;
pub mod error;
pub mod extraction;
pub mod metrics;
pub mod prediction_log;
pub mod report;
pub mod scoring;

pub use error::{Error, Result};
