//! Circuit simulator for CMOS-memristive transimpedance amplifiers.
//!
//! The pipeline is netlist text → [`netlist::Circuit`] → MNA solves in
//! [`solver`] → measurement procedures in [`analyses`]. The [`tia`] module
//! builds the four amplifier designs and checks their gain relations.

pub mod analyses;
pub mod devices;
mod error;
pub mod format;
pub mod netlist;
pub mod solver;
pub mod tia;

pub use analyses::{Metrics, SweepSeries};
pub use error::{ConvergenceFailure, Error, Result};
pub use netlist::{Circuit, Probe};
pub use solver::{NewtonConfig, SolveState};
