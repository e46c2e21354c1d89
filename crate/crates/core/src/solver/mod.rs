//! Modified nodal analysis and Newton–Raphson.

mod linear;
mod mna;
mod newton;
mod op;

pub use linear::solve_linear;
pub use mna::{stamp_linear, Layout, MnaSystem, StampMode, StampState, Stampable};
pub use newton::{
    newton_solve, CapBranch, Companion, ConvergenceReport, Engine, Excitation, NewtonConfig,
    SolveState, SourceOverrides, Strategy,
};
pub(crate) use newton::voltage;
pub use op::{operating_point, DeviceBias, OperatingPoint};
