//! Motor-imagery EEG classification benchmark.

pub mod classify;
pub mod config;
pub mod data;
pub mod error;
pub mod eval;
pub mod linalg;
pub mod preprocess;
pub mod report;
pub mod seeds;
pub mod select;
pub mod spectrum;
pub mod stats;

pub use error::{Error, Result, TrainError};
