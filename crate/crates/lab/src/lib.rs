//! File formats, parallel execution and the command line for
//! [`spillover_core`].

pub mod cli;
pub mod data;
pub mod error;
pub mod model_file;
pub mod parallel;
pub mod plot;
pub mod report;

pub use error::{LabError, Result};
