//! Coverage control of robot swarms by semi-discrete optimal transport.
//!
//! Targets are densities on an axis-aligned box discretized on a regular grid.
//! Robots own Laguerre (power) cells of that grid; the OTCC law moves them to
//! their cell centroids while adjusting the weights so every cell carries mass
//! `1/n`. The VTCC law is the same flow with frozen weights.

pub mod analysis;
pub mod control;
pub mod density;
pub mod error;
pub mod experiment;
pub mod simulate;
pub mod tessellation;

pub use control::{control_step, dual_value, grad_phi, grad_x, ControlOutput, ControllerParams, Law};
pub use density::{Density, Gaussian, Grid, GridDensity, Workspace};
pub use error::{Error, Result};
pub use simulate::{run, step, Record, SimConfig, SplitProbe, TrajectoryRecord};
pub use tessellation::{
    assign, assign_voronoi, boundary_point_1d, masses_and_centroids, neighbors, required_range, CellStats,
    SwarmState, Tessellation,
};
