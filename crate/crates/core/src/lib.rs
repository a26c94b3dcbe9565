//! Continuous (function-level) solution of first-kind Fredholm integral
//! equations: adaptive Chebyshev approximation, continuous cross
//! approximation of kernels, singular value expansions, and TSVE/Tikhonov
//! regularization with the discrepancy principle, in 1D and separable 2D.

pub mod error;
pub mod bivariate;
pub mod dense;
pub mod funapprox;
pub mod oracle;
pub mod problems;
pub mod regularize;
pub mod sve;

pub use error::{Error, Result};
pub use funapprox::{FuncApprox, Interval, PiecewiseFunc};
