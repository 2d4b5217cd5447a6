//! Energy-stable MAC discretization of the Cahn-Hilliard-Navier-Stokes system.
//!
//! The phase equation is advanced with a scalar auxiliary variable and
//! Crank-Nicolson in time, the momentum equation with Crank-Nicolson
//! viscosity and a skew-symmetric convection form. The discrete modified
//! energy then obeys an exact dissipation law for every time step size.
//!
//! ```no_run
//! use chns_core::harness::{parse_config, run_config};
//!
//! let cfg = parse_config("experiment = square_bubble\nn = 32\nT = 1\n")?;
//! let summary = run_config(&cfg, None)?;
//! println!("final energy {}", summary.track.last().unwrap().energy);
//! # Ok::<(), chns_core::ChnsError>(())
//! ```

// `!(x > 0.0)` is used on purpose so NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod diagnostics;
pub mod error;
pub mod grid;
pub mod harness;
pub mod linalg;
pub mod model;
pub mod norms;
pub mod ops;
pub mod stepper;

pub use diagnostics::{energy_audit, EnergyLedger, EnergyLedgerEntry, NormKind, Quantity, RateRow, Restrict};
pub use error::{ChnsError, Result};
pub use grid::{CellField, CornerField, Field, StaggeredGrid, Velocity, XFaceField, YFaceField};
pub use linalg::SolverReport;
pub use model::{ChnsState, Params, StepMode};
pub use stepper::{Observer, Simulation, StepReport, Stepper};
