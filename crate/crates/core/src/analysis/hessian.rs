//! Second derivatives of the dual functional.
//!
//! The finite-difference forms work in any dimension and are the reference.
//! The 1D closed forms follow from differentiating the region integrals with
//! respect to the boundary points `m_ij`.

use nalgebra::DMatrix;

use crate::control::{grad_phi, grad_x};
use crate::density::GridDensity;
use crate::error::{Error, Result};
use crate::tessellation::{boundary_point_1d, distance, SwarmState, Tessellation};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HessianMode {
    ClosedForm1d,
    FiniteDifference,
}

/// Boundary shift, in grid cells, targeted by the default finite-difference steps.
const FD_CELLS: f64 = 8.0;

/// Hessian of `F` in the weights at fixed positions.
pub fn hessian_phi(
    state: &SwarmState,
    grid_density: &GridDensity,
    mode: HessianMode,
) -> Result<DMatrix<f64>> {
    match mode {
        HessianMode::ClosedForm1d => hessian_phi_closed_1d(state, grid_density),
        HessianMode::FiniteDifference => {
            let tess = Tessellation::build(grid_density, state)?;
            let h = grid_density.grid().max_spacing();
            let steps = (0..state.len())
                .map(|j| FD_CELLS * h * nearest_neighbor_distance(state, &tess, j))
                .collect::<Vec<_>>();
            hessian_phi_fd(state, grid_density, &steps)
        }
    }
}

/// Hessian of `F` in the positions at fixed weights.
pub fn hessian_x(
    state: &SwarmState,
    grid_density: &GridDensity,
    mode: HessianMode,
) -> Result<DMatrix<f64>> {
    match mode {
        HessianMode::ClosedForm1d => hessian_x_closed_1d(state, grid_density),
        HessianMode::FiniteDifference => {
            let step = FD_CELLS * grid_density.grid().max_spacing();
            hessian_x_fd(state, grid_density, step)
        }
    }
}

fn nearest_neighbor_distance(state: &SwarmState, tess: &Tessellation, j: usize) -> f64 {
    let nearest = tess.neighbor_sets[j]
        .iter()
        .map(|&k| distance(state.position(j), state.position(k)))
        .fold(f64::INFINITY, f64::min);
    if nearest.is_finite() {
        nearest
    } else {
        1.0
    }
}

/// Central differences of the weight gradient, one step per column.
pub fn hessian_phi_fd(
    state: &SwarmState,
    grid_density: &GridDensity,
    steps: &[f64],
) -> Result<DMatrix<f64>> {
    let n = state.len();
    if steps.len() != n {
        return Err(Error::invalid("one finite-difference step per robot is required"));
    }
    let mut h = DMatrix::zeros(n, n);
    let mut probe = state.clone();
    for j in 0..n {
        let delta = steps[j];
        probe.weights[j] = state.weights[j] + delta;
        let plus = grad_phi(&Tessellation::build(grid_density, &probe)?, n);
        probe.weights[j] = state.weights[j] - delta;
        let minus = grad_phi(&Tessellation::build(grid_density, &probe)?, n);
        probe.weights[j] = state.weights[j];
        for i in 0..n {
            h[(i, j)] = (plus[i] - minus[i]) / (2.0 * delta);
        }
    }
    Ok(h)
}

/// Central differences of the position gradient.
pub fn hessian_x_fd(state: &SwarmState, grid_density: &GridDensity, step: f64) -> Result<DMatrix<f64>> {
    if step.is_nan() || step <= 0.0 {
        return Err(Error::invalid("finite-difference step must be positive"));
    }
    let nd = state.positions.len();
    let mut h = DMatrix::zeros(nd, nd);
    let mut probe = state.clone();
    for col in 0..nd {
        probe.positions[col] = state.positions[col] + step;
        let plus = grad_x(&probe, &Tessellation::build(grid_density, &probe)?);
        probe.positions[col] = state.positions[col] - step;
        let minus = grad_x(&probe, &Tessellation::build(grid_density, &probe)?);
        probe.positions[col] = state.positions[col];
        for row in 0..nd {
            h[(row, col)] = (plus[row] - minus[row]) / (2.0 * step);
        }
    }
    Ok(h)
}

fn require_1d(state: &SwarmState) -> Result<()> {
    if state.dim() != 1 {
        return Err(Error::UnsupportedDimension(state.dim()));
    }
    if let Some((i, j)) = state.coincident_pair() {
        return Err(Error::DegenerateConfiguration(i, j));
    }
    Ok(())
}

/// Boundary geometry between robot `i` and its neighbor `j` on the line.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Boundary1d {
    /// `m_ij`
    pub point: f64,
    /// `dm_ij / dx_i`
    pub dm_dxi: f64,
    /// `dm_ij / dx_j`
    pub dm_dxj: f64,
    /// `+1` when `m_ij` is the upper end of region `i`.
    pub side: f64,
}

pub(crate) fn boundary_1d(state: &SwarmState, i: usize, j: usize) -> Result<Boundary1d> {
    let (xi, xj) = (state.positions[i], state.positions[j]);
    let (pi, pj) = (state.weights[i], state.weights[j]);
    let point = boundary_point_1d(xi, xj, pi, pj)?;
    let c = (pi - pj) / ((xi - xj) * (xi - xj));
    Ok(Boundary1d {
        point,
        dm_dxi: 0.5 + c,
        dm_dxj: 0.5 - c,
        side: if xj > xi { 1.0 } else { -1.0 },
    })
}

fn hessian_phi_closed_1d(state: &SwarmState, grid_density: &GridDensity) -> Result<DMatrix<f64>> {
    require_1d(state)?;
    let n = state.len();
    let tess = Tessellation::build(grid_density, state)?;
    let mut h = DMatrix::zeros(n, n);
    for i in 0..n {
        for &j in &tess.neighbor_sets[i] {
            let b = boundary_1d(state, i, j)?;
            let w = grid_density.pdf(&[b.point]) / (state.positions[i] - state.positions[j]).abs();
            h[(i, j)] = w;
        }
    }
    for i in 0..n {
        let off: f64 = (0..n).filter(|&j| j != i).map(|j| h[(i, j)]).sum();
        h[(i, i)] = -off;
    }
    Ok(h)
}

fn hessian_x_closed_1d(state: &SwarmState, grid_density: &GridDensity) -> Result<DMatrix<f64>> {
    require_1d(state)?;
    let n = state.len();
    let tess = Tessellation::build(grid_density, state)?;
    let mut h = DMatrix::zeros(n, n);
    for i in 0..n {
        h[(i, i)] = tess.mass[i];
        for &j in &tess.neighbor_sets[i] {
            let b = boundary_1d(state, i, j)?;
            let arm = b.side * (state.positions[i] - b.point) * grid_density.pdf(&[b.point]);
            h[(i, j)] += arm * b.dm_dxj;
            h[(i, i)] += arm * b.dm_dxi;
        }
    }
    Ok(h)
}
