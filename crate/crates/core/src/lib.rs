//! Wavelet-based multiscale correlation analysis of paired 1D series and
//! 2D images.

// NaN-rejecting comparisons are written as negations on purpose.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![allow(clippy::excessive_precision)]

pub mod cli;
pub mod depstats;
pub mod dwt1d;
pub mod error;
pub mod filterbank;
pub mod multiscale;
pub mod ndwt1d;
pub mod par;
pub mod simgen;
pub mod wt2d;

pub use error::{Error, Result};
