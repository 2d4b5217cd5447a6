//! Configuration, initial conditions, output and experiment drivers.

pub mod config;
pub mod experiments;
pub mod init;
pub mod io;

pub use config::{load_config, parse_config, Experiment, InitKind, RunConfig};
pub use experiments::{buoyant_bubble, converge, run_config, square_bubble, ConvergenceStudy, RunSummary, TrackPoint, TABLES};
pub use init::init_condition;
pub use io::{read_cell_csv, write_cell_csv, write_snapshot, write_vtk, SnapshotRecord};
