//! Equilibrium residuals and Lyapunov stability indicators.

use nalgebra::DMatrix;
use serde::Serialize;

use super::eigen::{pd_check, symmetrize};
use super::hessian::{boundary_1d, hessian_phi, hessian_x, HessianMode};
use crate::density::GridDensity;
use crate::error::{Error, Result};
use crate::tessellation::{SwarmState, Tessellation};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum HIndexForm {
    /// The literal 1D expression, with half-differences
    /// `x_ij = (x_i - x_j)/2`, `phi_ij = (phi_i - phi_j)/2` and `x_ij^+ = (x_i + x_j)/2`
    /// substituted term by term.
    Literal,
    /// `2n sum_j |x_i - m_ij| |dm_ij/dx_j| rho(m_ij)` at the exact boundary points.
    Derived,
    /// Gershgorin row bound of the 1D position Hessian with `a_i` replaced by
    /// its equilibrium value `1/n`:
    /// `n sum_j |x_i - m_ij| (|dm_ij/dx_i| + |dm_ij/dx_j|) rho(m_ij)`.
    /// Equals [`HIndexForm::Derived`] when neighboring weights are equal.
    Gershgorin,
}

/// Per-robot stability index on the line; all entries below 1 at an
/// equilibrium is sufficient for the position Hessian to be positive definite.
pub fn h_index(state: &SwarmState, grid_density: &GridDensity, form: HIndexForm) -> Result<Vec<f64>> {
    if state.dim() != 1 {
        return Err(Error::UnsupportedDimension(state.dim()));
    }
    let tess = Tessellation::build(grid_density, state)?;
    let n = state.len() as f64;
    let x = &state.positions;
    let phi = &state.weights;
    let rho = |y: f64| grid_density.pdf(&[y]);
    (0..state.len())
        .map(|i| {
            let mut sum = 0.0;
            for &j in &tess.neighbor_sets[i] {
                sum += match form {
                    HIndexForm::Literal => {
                        let xij = 0.5 * (x[i] - x[j]);
                        let pij = 0.5 * (phi[i] - phi[j]);
                        let xp = 0.5 * (x[i] + x[j]);
                        2.0 * (0.5 * xij + pij / xij).abs()
                            * (0.5 + pij.abs() / (xij * xij))
                            * rho(0.5 * xp - pij / xij)
                    }
                    HIndexForm::Derived => {
                        let b = boundary_1d(state, i, j)?;
                        2.0 * (x[i] - b.point).abs() * b.dm_dxj.abs() * rho(b.point)
                    }
                    HIndexForm::Gershgorin => {
                        let b = boundary_1d(state, i, j)?;
                        (x[i] - b.point).abs() * (b.dm_dxi.abs() + b.dm_dxj.abs()) * rho(b.point)
                    }
                };
            }
            Ok(n * sum)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StabilityReport {
    /// `max_i |x_i - b_i|` over non-empty regions.
    pub centroid_residual: f64,
    /// `max_i |a_i - 1/n|`.
    pub mass_residual: f64,
    #[serde(skip)]
    pub hessian_x: DMatrix<f64>,
    #[serde(skip)]
    pub hessian_phi: DMatrix<f64>,
    pub min_eig_hessian_x: f64,
    pub hessian_x_positive_definite: bool,
    pub max_eig_hessian_phi: f64,
    /// Derived form; empty outside 1D.
    pub h_index: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub h_index_max: Option<f64>,
    /// Literal form; empty outside 1D.
    pub h_index_literal: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub h_index_literal_max: Option<f64>,
    /// Exact row bound; empty outside 1D.
    pub h_index_gershgorin: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub h_index_gershgorin_max: Option<f64>,
    /// 1D: every derived index below 1. Otherwise: finite-difference
    /// position Hessian positive definite.
    pub lyapunov_stable: bool,
}

pub fn stability_report(state: &SwarmState, grid_density: &GridDensity) -> Result<StabilityReport> {
    let tess = Tessellation::build(grid_density, state)?;
    let n = state.len();
    let inv_n = 1.0 / n as f64;
    let mut centroid_residual: f64 = 0.0;
    for i in (0..n).filter(|&i| !tess.empty[i]) {
        let r = state
            .position(i)
            .iter()
            .zip(tess.centroid(i))
            .map(|(x, b)| (x - b) * (x - b))
            .sum::<f64>()
            .sqrt();
        centroid_residual = centroid_residual.max(r);
    }
    let mass_residual = tess.mass.iter().map(|a| (a - inv_n).abs()).fold(0.0, f64::max);

    let hx = symmetrize(&hessian_x(state, grid_density, HessianMode::FiniteDifference)?);
    let phi_mode = if state.dim() == 1 {
        HessianMode::ClosedForm1d
    } else {
        HessianMode::FiniteDifference
    };
    let hp = symmetrize(&hessian_phi(state, grid_density, phi_mode)?);
    let x_check = pd_check(&hx)?;
    let phi_check = pd_check(&hp)?;

    let (h, h_lit, h_ger) = if state.dim() == 1 {
        (
            h_index(state, grid_density, HIndexForm::Derived)?,
            h_index(state, grid_density, HIndexForm::Literal)?,
            h_index(state, grid_density, HIndexForm::Gershgorin)?,
        )
    } else {
        (Vec::new(), Vec::new(), Vec::new())
    };
    let max_of = |v: &[f64]| v.iter().copied().reduce(f64::max);
    let lyapunov_stable = if state.dim() == 1 {
        h.iter().all(|&v| v < 1.0)
    } else {
        x_check.positive_definite
    };
    Ok(StabilityReport {
        centroid_residual,
        mass_residual,
        min_eig_hessian_x: x_check.min_eigenvalue,
        hessian_x_positive_definite: x_check.positive_definite,
        max_eig_hessian_phi: phi_check.max_eigenvalue,
        h_index_max: max_of(&h),
        h_index_literal_max: max_of(&h_lit),
        h_index: h,
        h_index_literal: h_lit,
        h_index_gershgorin_max: max_of(&h_ger),
        h_index_gershgorin: h_ger,
        hessian_x: hx,
        hessian_phi: hp,
        lyapunov_stable,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::{Density, Grid, Workspace};

    fn gaussian_line() -> GridDensity {
        let grid = Grid::new(Workspace::new(vec![-10.0], vec![10.0]).unwrap(), vec![2000]).unwrap();
        Density::gaussian(vec![0.0], vec![3.0])
            .unwrap()
            .discretize(&grid)
            .unwrap()
    }

    #[test]
    fn single_robot_has_zero_index() {
        let gd = gaussian_line();
        let s = SwarmState::from_points(&[vec![0.0]]).unwrap();
        for form in [HIndexForm::Derived, HIndexForm::Literal, HIndexForm::Gershgorin] {
            assert_eq!(h_index(&s, &gd, form).unwrap(), vec![0.0]);
        }
        let report = stability_report(&s, &gd).unwrap();
        assert!(report.lyapunov_stable);
        assert!(report.hessian_x_positive_definite);
    }

    #[test]
    fn derived_index_hand_value() {
        // two robots, equal weights: boundary at the midpoint, dm/dx = 1/2 each
        let gd = gaussian_line();
        let s = SwarmState::from_points(&[vec![-1.0], vec![2.0]]).unwrap();
        let h = h_index(&s, &gd, HIndexForm::Derived).unwrap();
        let expected = 2.0 * 1.5 * gd.pdf(&[0.5]);
        assert!((h[0] - expected).abs() < 1e-15);
        assert!((h[1] - expected).abs() < 1e-15);
        let g = h_index(&s, &gd, HIndexForm::Gershgorin).unwrap();
        assert!((g[0] - expected).abs() < 1e-15);
        // literal: 2n |x_ij / 2| (1/2) rho(x_ij^+ / 2) with x_ij = -1.5, x_ij^+ = 0.5
        let lit = h_index(&s, &gd, HIndexForm::Literal).unwrap();
        let expected = 4.0 * 0.75 * 0.5 * gd.pdf(&[0.25]);
        assert!((lit[0] - expected).abs() < 1e-15);
    }

    #[test]
    fn weighted_pair_separates_the_forms() {
        // m = 0.5 - 1/(-3) = 5/6, c = 1/9: dm/dx_0 = 11/18, dm/dx_1 = 7/18
        let gd = gaussian_line();
        let s = SwarmState::from_points(&[vec![-1.0], vec![2.0]])
            .unwrap()
            .with_weights(vec![1.0, 0.0])
            .unwrap();
        let m = 5.0 / 6.0;
        let rho = gd.pdf(&[m]);
        let d = h_index(&s, &gd, HIndexForm::Derived).unwrap();
        let g = h_index(&s, &gd, HIndexForm::Gershgorin).unwrap();
        assert!((d[0] - 4.0 * (1.0 + m) * (7.0 / 18.0) * rho).abs() < 1e-14);
        assert!((d[1] - 4.0 * (2.0 - m) * (11.0 / 18.0) * rho).abs() < 1e-14);
        assert!((g[0] - 2.0 * (1.0 + m) * rho).abs() < 1e-14);
        assert!((g[1] - 2.0 * (2.0 - m) * rho).abs() < 1e-14);
    }

    #[test]
    fn derived_index_ignores_uniform_weight_shift() {
        let gd = gaussian_line();
        let s = SwarmState::from_points(&[vec![-2.0], vec![0.1], vec![1.7]])
            .unwrap()
            .with_weights(vec![0.1, -0.05, 0.2])
            .unwrap();
        let shifted = s.clone().with_weights(vec![1.1, 0.95, 1.2]).unwrap();
        let a = h_index(&s, &gd, HIndexForm::Derived).unwrap();
        let b = h_index(&shifted, &gd, HIndexForm::Derived).unwrap();
        for (p, q) in a.iter().zip(&b) {
            assert!((p - q).abs() < 1e-9);
        }
    }

    #[test]
    fn index_needs_one_dimension() {
        let ws = Workspace::new(vec![-1.0, -1.0], vec![1.0, 1.0]).unwrap();
        let gd = Density::uniform(vec![-1.0, -1.0], vec![1.0, 1.0])
            .unwrap()
            .discretize(&Grid::new(ws, vec![10, 10]).unwrap())
            .unwrap();
        let s = SwarmState::from_points(&[vec![0.0, 0.0]]).unwrap();
        assert_eq!(
            h_index(&s, &gd, HIndexForm::Derived).unwrap_err(),
            Error::UnsupportedDimension(2)
        );
    }
}
