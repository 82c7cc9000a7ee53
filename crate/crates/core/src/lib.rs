//! Pseudo-spectral lab for the compressible Navier-Stokes-Korteweg system in
//! perturbation form around a constant state `(rho*, 0)`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod decay;
pub mod error;
pub mod experiment;
pub mod integrator;
pub mod field;
pub mod initial;
pub mod linear;
pub mod lp;
pub mod nonlinear;
pub mod params;
pub mod snapshot;
pub mod verify;

pub use error::{NskError, Result};
pub use params::{FluidParams, PressureLaw};
