//! Grid-based Laguerre (power) diagrams of a robot swarm.
//!
//! A grid cell with center `y` belongs to the robot minimizing
//! `0.5 * |x_i - y|^2 - phi_i`. With all weights equal this is the ordinary
//! Voronoi assignment.

use std::collections::BTreeSet;

use crate::density::{Grid, GridDensity};
use crate::error::{Error, Result};

/// Robots with a mass below this are treated as owning an empty region.
pub const EMPTY_MASS: f64 = 1e-12;

/// Minimum separation between two robots.
pub const MIN_SEPARATION: f64 = 1e-12;

/// Positions and dual weights of `n` robots at one instant.
#[derive(Debug, Clone, PartialEq)]
pub struct SwarmState {
    dim: usize,
    /// Flat `n * dim` coordinates.
    pub positions: Vec<f64>,
    pub weights: Vec<f64>,
    pub time: f64,
}

impl SwarmState {
    pub fn new(dim: usize, positions: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if dim == 0 || !positions.len().is_multiple_of(dim) {
            return Err(Error::invalid(format!(
                "{} coordinates cannot be split into points of dimension {dim}",
                positions.len()
            )));
        }
        let n = positions.len() / dim;
        if n == 0 {
            return Err(Error::invalid("a swarm needs at least one robot"));
        }
        if weights.len() != n {
            return Err(Error::invalid(format!(
                "{} weights given for {n} robots",
                weights.len()
            )));
        }
        Ok(SwarmState {
            dim,
            positions,
            weights,
            time: 0.0,
        })
    }

    /// Zero-weight swarm from a list of points.
    pub fn from_points(points: &[Vec<f64>]) -> Result<Self> {
        let dim = points.first().map_or(0, Vec::len);
        if points.iter().any(|p| p.len() != dim) {
            return Err(Error::invalid("points differ in dimension"));
        }
        let flat = points.concat();
        SwarmState::new(dim, flat, vec![0.0; points.len()])
    }

    pub fn with_weights(mut self, weights: Vec<f64>) -> Result<Self> {
        if weights.len() != self.len() {
            return Err(Error::invalid("weight count does not match robot count"));
        }
        self.weights = weights;
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn position(&self, i: usize) -> &[f64] {
        &self.positions[i * self.dim..(i + 1) * self.dim]
    }

    pub fn position_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.positions[i * self.dim..(i + 1) * self.dim]
    }

    /// Returns the first pair of robots closer than [`MIN_SEPARATION`].
    pub fn coincident_pair(&self) -> Option<(usize, usize)> {
        let n = self.len();
        for i in 0..n {
            for j in i + 1..n {
                if distance(self.position(i), self.position(j)) <= MIN_SEPARATION {
                    return Some((i, j));
                }
            }
        }
        None
    }
}

pub(crate) fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(p, q)| (p - q) * (p - q))
        .sum::<f64>()
        .sqrt()
}

/// Owner of every grid cell under the Laguerre assignment with weights `state.weights`.
///
/// Ties go to the lowest robot index.
pub fn assign(grid: &Grid, state: &SwarmState) -> Result<Vec<usize>> {
    assign_with_weights(grid, state, &state.weights)
}

/// Owner of every grid cell under the plain Voronoi assignment (all weights zero).
pub fn assign_voronoi(grid: &Grid, state: &SwarmState) -> Result<Vec<usize>> {
    assign_with_weights(grid, state, &vec![0.0; state.len()])
}

fn assign_with_weights(grid: &Grid, state: &SwarmState, weights: &[f64]) -> Result<Vec<usize>> {
    if state.dim() != grid.dim() {
        return Err(Error::invalid(format!(
            "swarm dimension {} does not match grid dimension {}",
            state.dim(),
            grid.dim()
        )));
    }
    if let Some((i, j)) = state.coincident_pair() {
        return Err(Error::DegenerateConfiguration(i, j));
    }
    let x = &state.positions;
    let owner = match grid.dim() {
        1 => grid
            .centers()
            .iter()
            .map(|&y| {
                let mut best = 0;
                let mut best_cost = f64::INFINITY;
                for (i, (&xi, &wi)) in x.iter().zip(weights).enumerate() {
                    let dy = xi - y;
                    let cost = 0.5 * dy * dy - wi;
                    if cost < best_cost {
                        best_cost = cost;
                        best = i;
                    }
                }
                best
            })
            .collect(),
        _ => grid
            .centers()
            .chunks_exact(2)
            .map(|c| {
                let (y0, y1) = (c[0], c[1]);
                let mut best = 0;
                let mut best_cost = f64::INFINITY;
                for (i, (p, &wi)) in x.chunks_exact(2).zip(weights).enumerate() {
                    let (d0, d1) = (p[0] - y0, p[1] - y1);
                    let cost = 0.5 * (d0 * d0 + d1 * d1) - wi;
                    if cost < best_cost {
                        best_cost = cost;
                        best = i;
                    }
                }
                best
            })
            .collect(),
    };
    Ok(owner)
}

/// Per-robot integrals over the owned cells.
#[derive(Debug, Clone, PartialEq)]
pub struct CellStats {
    /// Target mass of each region.
    pub mass: Vec<f64>,
    /// Flat `n * dim` mass centroids; a robot's own position when its region is empty.
    pub centroid: Vec<f64>,
    pub empty: Vec<bool>,
}

pub fn masses_and_centroids(owner: &[usize], grid_density: &GridDensity, state: &SwarmState) -> CellStats {
    let n = state.len();
    let d = state.dim();
    let mut mass = vec![0.0; n];
    let mut moment = vec![0.0; n * d];
    let centers = grid_density.grid().centers();
    for (cell, (&o, &m)) in owner.iter().zip(grid_density.cell_mass()).enumerate() {
        mass[o] += m;
        for k in 0..d {
            moment[o * d + k] += m * centers[cell * d + k];
        }
    }
    let mut empty = vec![false; n];
    let mut centroid = moment;
    for i in 0..n {
        if mass[i] < EMPTY_MASS {
            empty[i] = true;
            centroid[i * d..(i + 1) * d].copy_from_slice(state.position(i));
        } else {
            for k in 0..d {
                centroid[i * d + k] /= mass[i];
            }
        }
    }
    CellStats {
        mass,
        centroid,
        empty,
    }
}

/// Robots whose regions touch across a grid face. Symmetric.
pub fn neighbors(owner: &[usize], grid: &Grid, n: usize) -> Vec<BTreeSet<usize>> {
    let mut sets = vec![BTreeSet::new(); n];
    grid.for_each_adjacent_pair(|a, b| {
        let (oa, ob) = (owner[a], owner[b]);
        if oa != ob {
            sets[oa].insert(ob);
            sets[ob].insert(oa);
        }
    });
    sets
}

/// Point where the 1D Laguerre regions of robots `i` and `j` meet.
pub fn boundary_point_1d(xi: f64, xj: f64, phi_i: f64, phi_j: f64) -> Result<f64> {
    let dx = xi - xj;
    if dx.abs() < MIN_SEPARATION {
        return Err(Error::invalid(format!(
            "robots at {xi} and {xj} are too close for a boundary point"
        )));
    }
    Ok(0.5 * (xi + xj) - (phi_i - phi_j) / dx)
}

/// Sensing range robot `i` needs to see all of its Laguerre neighbors.
pub fn required_range(state: &SwarmState, neighbor_sets: &[BTreeSet<usize>], i: usize) -> f64 {
    neighbor_sets[i]
        .iter()
        .map(|&j| distance(state.position(i), state.position(j)))
        .fold(0.0, f64::max)
}

/// Complete grid tessellation of one swarm state.
#[derive(Debug, Clone, PartialEq)]
pub struct Tessellation {
    pub owner: Vec<usize>,
    pub mass: Vec<f64>,
    pub centroid: Vec<f64>,
    pub neighbor_sets: Vec<BTreeSet<usize>>,
    pub empty: Vec<bool>,
    dim: usize,
}

impl Tessellation {
    /// Laguerre tessellation at the state's own weights.
    pub fn build(grid_density: &GridDensity, state: &SwarmState) -> Result<Self> {
        let owner = assign(grid_density.grid(), state)?;
        Ok(Self::from_owner(owner, grid_density, state))
    }

    /// Voronoi tessellation of the state's positions, ignoring its weights.
    pub fn build_voronoi(grid_density: &GridDensity, state: &SwarmState) -> Result<Self> {
        let owner = assign_voronoi(grid_density.grid(), state)?;
        Ok(Self::from_owner(owner, grid_density, state))
    }

    fn from_owner(owner: Vec<usize>, grid_density: &GridDensity, state: &SwarmState) -> Self {
        let stats = masses_and_centroids(&owner, grid_density, state);
        let neighbor_sets = neighbors(&owner, grid_density.grid(), state.len());
        Tessellation {
            owner,
            mass: stats.mass,
            centroid: stats.centroid,
            neighbor_sets,
            empty: stats.empty,
            dim: state.dim(),
        }
    }

    pub fn len(&self) -> usize {
        self.mass.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mass.is_empty()
    }

    pub fn centroid(&self, i: usize) -> &[f64] {
        &self.centroid[i * self.dim..(i + 1) * self.dim]
    }
}
