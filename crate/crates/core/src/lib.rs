//! Two-dimensional P-wave simulation with Godunov-type finite-volume schemes
//! (f-wave wave propagation, central-upwind with Kurganov–Lin flux), even-order
//! finite-difference comparators and a benchmarking harness.

pub mod cli;
pub mod config;
pub mod cup;
pub mod error;
pub mod fd;
pub mod harness;
pub mod io;
pub mod grid;
pub mod model;
pub mod model_file;
pub mod riemann;
pub mod state;
pub mod wpa;

pub use error::{Error, Result};
