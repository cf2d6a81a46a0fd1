//! Dual functional, its gradients, and the two coverage control laws.
//!
//! Both laws move robots toward the centroids of their regions. OTCC also
//! runs gradient ascent on the weights so that every region ends up holding
//! mass `1/n`; VTCC keeps the weights frozen, which with zero weights is the
//! classical Lloyd-type Voronoi controller.

use serde::{Deserialize, Serialize};

use crate::density::GridDensity;
use crate::error::{Error, Result};
use crate::tessellation::{SwarmState, Tessellation};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Law {
    Vtcc,
    Otcc,
}

impl Law {
    pub fn as_str(self) -> &'static str {
        match self {
            Law::Vtcc => "vtcc",
            Law::Otcc => "otcc",
        }
    }
}

impl std::fmt::Display for Law {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ControllerParams {
    pub law: Law,
    /// Position feedback gain.
    pub k: f64,
    /// Weight ascent gain; ignored by VTCC.
    pub k_prime: f64,
}

impl ControllerParams {
    pub fn new(law: Law, k: f64, k_prime: f64) -> Result<Self> {
        let p = ControllerParams { law, k, k_prime };
        p.validate()?;
        Ok(p)
    }

    pub fn otcc(k: f64, k_prime: f64) -> Result<Self> {
        Self::new(Law::Otcc, k, k_prime)
    }

    pub fn vtcc(k: f64) -> Result<Self> {
        Self::new(Law::Vtcc, k, 0.0)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.k.is_finite() && self.k > 0.0) {
            return Err(Error::invalid(format!("controller.k = {} must be positive", self.k)));
        }
        if !(self.k_prime.is_finite() && self.k_prime >= 0.0) {
            return Err(Error::invalid(format!(
                "controller.k_prime = {} must be non-negative",
                self.k_prime
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ControlOutput {
    /// Flat `n * dim` velocity inputs.
    pub u: Vec<f64>,
    pub phi_dot: Vec<f64>,
    pub grad_x: Vec<f64>,
    pub grad_phi: Vec<f64>,
    pub f_value: f64,
}

impl ControlOutput {
    pub fn u_norms(&self, dim: usize) -> Vec<f64> {
        self.u
            .chunks_exact(dim)
            .map(|v| v.iter().map(|c| c * c).sum::<f64>().sqrt())
            .collect()
    }

    pub fn max_u_norm(&self, dim: usize) -> f64 {
        self.u_norms(dim).into_iter().fold(0.0, f64::max)
    }

    pub fn max_phi_dot(&self) -> f64 {
        self.phi_dot.iter().map(|p| p.abs()).fold(0.0, f64::max)
    }
}

/// `F(x, phi) = sum_i (1/n - a_i) phi_i + sum_i integral over region i of 0.5 |x_i - y|^2`.
pub fn dual_value(state: &SwarmState, tess: &Tessellation, grid_density: &GridDensity) -> f64 {
    let n = state.len();
    let inv_n = 1.0 / n as f64;
    let weight_term: f64 = state
        .weights
        .iter()
        .zip(&tess.mass)
        .map(|(phi, a)| (inv_n - a) * phi)
        .sum();
    weight_term + transport_cost(state, &tess.owner, grid_density)
}

/// `sum over cells c of 0.5 |x_owner(c) - c|^2 * mass(c)`, summed in cell order.
pub fn transport_cost(state: &SwarmState, owner: &[usize], grid_density: &GridDensity) -> f64 {
    let d = state.dim();
    let centers = grid_density.grid().centers();
    let mut total = 0.0;
    for (cell, (&o, &m)) in owner.iter().zip(grid_density.cell_mass()).enumerate() {
        let mut r2 = 0.0;
        for k in 0..d {
            let dy = state.positions[o * d + k] - centers[cell * d + k];
            r2 += dy * dy;
        }
        total += 0.5 * r2 * m;
    }
    total
}

/// `dF/dphi_i = 1/n - a_i`.
pub fn grad_phi(tess: &Tessellation, n: usize) -> Vec<f64> {
    let inv_n = 1.0 / n as f64;
    tess.mass.iter().map(|a| inv_n - a).collect()
}

/// `dF/dx_i = a_i (x_i - b_i)`, zero for robots with empty regions.
pub fn grad_x(state: &SwarmState, tess: &Tessellation) -> Vec<f64> {
    let d = state.dim();
    let mut g = vec![0.0; state.positions.len()];
    for i in 0..state.len() {
        if tess.empty[i] {
            continue;
        }
        for k in 0..d {
            g[i * d + k] = tess.mass[i] * (state.positions[i * d + k] - tess.centroid[i * d + k]);
        }
    }
    g
}

/// Evaluates the control law at `state`, whose tessellation is `tess`.
pub fn control_step(
    state: &SwarmState,
    tess: &Tessellation,
    grid_density: &GridDensity,
    params: &ControllerParams,
) -> ControlOutput {
    let n = state.len();
    let u = state
        .positions
        .iter()
        .zip(&tess.centroid)
        .map(|(x, b)| -params.k * (x - b))
        .collect();
    let gphi = grad_phi(tess, n);
    let phi_dot = match params.law {
        Law::Otcc => gphi.iter().map(|g| params.k_prime * g).collect(),
        Law::Vtcc => vec![0.0; n],
    };
    ControlOutput {
        u,
        phi_dot,
        grad_x: grad_x(state, tess),
        grad_phi: gphi,
        f_value: dual_value(state, tess, grid_density),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::{Density, Grid, Workspace};

    fn uniform(lo: f64, hi: f64, cells: usize) -> GridDensity {
        let grid = Grid::new(Workspace::new(vec![lo], vec![hi]).unwrap(), vec![cells]).unwrap();
        Density::uniform(vec![lo], vec![hi])
            .unwrap()
            .discretize(&grid)
            .unwrap()
    }

    #[test]
    fn single_robot_value_is_half_second_moment() {
        let gd = uniform(0.0, 1.0, 1000);
        let s = SwarmState::from_points(&[vec![0.2]]).unwrap();
        let t = Tessellation::build(&gd, &s).unwrap();
        let f = dual_value(&s, &t, &gd);
        // 0.5 * integral_0^1 (y - 0.2)^2 dy, midpoint rule error h^2 / 24
        let exact = 0.5 * ((0.8f64).powi(3) + (0.2f64).powi(3)) / 3.0;
        assert!((f - exact).abs() < 1e-6);
        assert!(grad_phi(&t, 1)[0].abs() < 1e-14);
    }

    #[test]
    fn symmetric_pair_has_zero_weight_gradient() {
        let gd = uniform(-10.0, 10.0, 400);
        let s = SwarmState::from_points(&[vec![-1.0], vec![1.0]]).unwrap();
        let t = Tessellation::build(&gd, &s).unwrap();
        for g in grad_phi(&t, 2) {
            assert!(g.abs() < 1e-12);
        }
    }

    #[test]
    fn uniform_shift_leaves_value_unchanged() {
        let gd = uniform(-10.0, 10.0, 400);
        let s = SwarmState::from_points(&[vec![-3.0], vec![0.5], vec![4.0]])
            .unwrap()
            .with_weights(vec![0.3, -0.2, 1.0])
            .unwrap();
        let t = Tessellation::build(&gd, &s).unwrap();
        let f = dual_value(&s, &t, &gd);
        let shifted = s.clone().with_weights(vec![2.3, 1.8, 3.0]).unwrap();
        let ts = Tessellation::build(&gd, &shifted).unwrap();
        assert_eq!(t.owner, ts.owner);
        assert!((dual_value(&shifted, &ts, &gd) - f).abs() < 1e-12);
    }

    #[test]
    fn robot_at_centroid_has_zero_gradient() {
        let gd = uniform(-10.0, 10.0, 400);
        let s = SwarmState::from_points(&[vec![0.0]]).unwrap();
        let t = Tessellation::build(&gd, &s).unwrap();
        assert!(grad_x(&s, &t)[0].abs() < 1e-12);

        let g = Density::gaussian(vec![0.0], vec![3.0]).unwrap();
        let gd = g.discretize(gd.grid()).unwrap();
        let s = SwarmState::from_points(&[vec![2.0]]).unwrap();
        let t = Tessellation::build(&gd, &s).unwrap();
        assert!((grad_x(&s, &t)[0] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn weighted_pair_input() {
        let gd = uniform(-10.0, 10.0, 2000);
        let s = SwarmState::from_points(&[vec![-1.0], vec![1.0]])
            .unwrap()
            .with_weights(vec![0.5, 0.0])
            .unwrap();
        let t = Tessellation::build(&gd, &s).unwrap();
        let out = control_step(&s, &t, &gd, &ControllerParams::otcc(0.5, 1e-3).unwrap());
        // region of robot 0 is [-10, 0.25], centroid -4.875
        assert!((out.u[0] + 1.9375).abs() < 1e-9, "{}", out.u[0]);
        assert!((out.phi_dot.iter().sum::<f64>()).abs() < 1e-15);
        for i in 0..2 {
            let back = out.u[i] * (-1.0 / 0.5) + t.centroid[i];
            assert!((back - s.positions[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn otcc_without_weight_gain_matches_vtcc() {
        let gd = uniform(-10.0, 10.0, 500);
        let s = SwarmState::from_points(&[vec![-7.0], vec![-6.5], vec![2.0]]).unwrap();
        let t = Tessellation::build(&gd, &s).unwrap();
        let a = control_step(&s, &t, &gd, &ControllerParams::otcc(0.5, 0.0).unwrap());
        let b = control_step(&s, &t, &gd, &ControllerParams::vtcc(0.5).unwrap());
        assert_eq!(a.u, b.u);
        assert!(b.phi_dot.iter().all(|&p| p == 0.0));
    }

    #[test]
    fn gains_are_validated() {
        assert!(ControllerParams::otcc(0.0, 1.0).is_err());
        assert!(ControllerParams::otcc(1.0, -1.0).is_err());
        assert!(serde_json::from_str::<Law>("\"lloyd\"").is_err());
    }
}
