//! Command-line front end: matrix generation, analysis and sweep drivers,
//! file formats and SVG plots.

pub mod commands;
pub mod error;
pub mod families;
pub mod files;
pub mod svg;

pub use error::{CliError, Result};
