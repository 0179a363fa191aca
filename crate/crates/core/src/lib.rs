//! One-dimensional extended discontinuous Galerkin (XDG) solver for the
//! stationary Euler equations with sub-cell shock interface correction.
//!
//! A normal shock is represented by a level-set interface cutting one
//! background cell. Each pseudo-time-step freezes the interface, drives the
//! flow to a steady state with implicit Euler/Newton, and moves the interface
//! by bisection according to the sign of a zeroth-order projection indicator.

pub mod case;
pub mod error;
pub mod euler;
pub mod exec;
pub mod grid;
pub mod quadrature;
pub mod report;
pub mod riemann;
pub mod shockfit;
pub mod timestepper;
pub mod xdg;

pub use case::{InitKind, ShockCase};
pub use error::{Error, Result};
pub use euler::{ConservedState, GasModel, PrimitiveState};
pub use exec::Execution;
pub use shockfit::{IndicatorKind, LoopConfig, P0Average, PseudoTimeTrace};
pub use timestepper::SolverConfig;
