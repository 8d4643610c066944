//! Exact and Monte Carlo statistics of stationary symbolic processes:
//! cylinder measures, the information function, entropy and moment scales,
//! mixing coefficients, limiting variance and recurrence times.

#![allow(clippy::needless_range_loop)]

pub mod enumerate;
pub mod error;
pub mod lab;
pub mod mixing;
pub mod numeric;
pub mod pairs;
pub mod process;
pub mod seed;
pub mod stats;
pub mod trajectory;

pub use error::{Error, Result};
pub use process::{validate_spec, LogMeasure, Process, ProcessSpec, Symbol, ValidateOptions, Word};
pub use trajectory::{sample_trajectory, Trajectory};
