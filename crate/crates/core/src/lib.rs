// NaN must fail validation, hence `!(x > 0.0)` rather than `x <= 0.0`.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod approx;
pub mod error;
pub mod numkernel;
pub mod oracle;
pub mod sensitivity;
pub mod structures;

pub use error::{Error, Result};
