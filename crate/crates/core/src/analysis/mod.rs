//! Coverage cost, stability diagnostics, and the 1D transport oracle.

mod audit;
mod eigen;
mod hessian;
mod stability;
mod wasserstein;

pub use audit::{epsilon_mono, monotonicity_audit, MonotonicityReport};
pub use eigen::{pd_check, symmetrize, PdCheck};
pub use hessian::{hessian_phi, hessian_phi_fd, hessian_x, hessian_x_fd, HessianMode};
pub use stability::{h_index, stability_report, HIndexForm, StabilityReport};
pub use wasserstein::{duality_gap_1d, wasserstein_1d, DualityGap};

use crate::control::transport_cost;
use crate::density::GridDensity;
use crate::error::Result;
use crate::tessellation::{assign, assign_voronoi, SwarmState};

/// Coverage cost `J = sum_i integral over region i of 0.5 |y - x_i|^2 rho_T(y) dy`.
///
/// With `at_voronoi` the regions are Voronoi cells (weights ignored);
/// otherwise they are the Laguerre cells at the state's weights.
pub fn cost_j(state: &SwarmState, grid_density: &GridDensity, at_voronoi: bool) -> Result<f64> {
    let owner = if at_voronoi {
        assign_voronoi(grid_density.grid(), state)?
    } else {
        assign(grid_density.grid(), state)?
    };
    Ok(transport_cost(state, &owner, grid_density))
}
