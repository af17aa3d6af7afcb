//! Weinhold thermodynamic length for two-variable systems with constant
//! heat capacity.
//!
//! * [`eos`]: the constant-`c_v` constitutive family and its ideal and
//!   Van der Waals members.
//! * [`geometry`]: the Weinhold metric in Hessian and response-coefficient
//!   form, and path lengths by adaptive quadrature.
//! * [`isochoric`]: closed-form length and heat along isochores and the
//!   exact relations between them.
//! * [`verify`]: grid-based checks of all of the above, as a report.
//! * [`cli`]: the `thermo-length` command-line tool.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod eos;
pub mod error;
pub mod format;
pub mod geometry;
pub mod isochoric;
pub mod verify;

pub use eos::{ConstantCvEos, IdealGasParams, ThermoState, VanDerWaalsParams};
pub use error::{Error, Result};
