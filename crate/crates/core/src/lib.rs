//! Exact enumeration and Monte Carlo toolkit for free-energy fluctuations of
//! the Sherrington–Kirkpatrick spin glass near its critical temperature.

pub mod cli;
pub mod ensemble;
pub mod error;
pub mod exact;
pub mod interp;
pub mod mc;
pub mod model;
pub mod rng;
pub mod stats;

pub use error::{Result, SkError};
