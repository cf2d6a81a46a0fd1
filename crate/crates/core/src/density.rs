//! Target densities and their midpoint-rule discretization over a box workspace.

use serde::{Deserialize, Serialize};
use statrs::function::erf::erf;

use crate::error::{Error, Result};

/// Axis-aligned box `[lower, upper]` in one or two dimensions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Workspace {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl Workspace {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        let ws = Workspace { lower, upper };
        ws.validate()?;
        Ok(ws)
    }

    pub fn validate(&self) -> Result<()> {
        if self.lower.len() != self.upper.len() {
            return Err(Error::invalid(format!(
                "workspace bounds have lengths {} and {}",
                self.lower.len(),
                self.upper.len()
            )));
        }
        if !(1..=2).contains(&self.lower.len()) {
            return Err(Error::invalid(format!(
                "workspace dimension {} is not supported (1 or 2)",
                self.lower.len()
            )));
        }
        for (k, (lo, hi)) in self.lower.iter().zip(&self.upper).enumerate() {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(Error::invalid(format!(
                    "workspace axis {k}: lower {lo} must be below upper {hi}"
                )));
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn volume(&self) -> f64 {
        self.lower.iter().zip(&self.upper).map(|(lo, hi)| hi - lo).product()
    }

    /// Length of the main diagonal.
    pub fn diameter(&self) -> f64 {
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(lo, hi)| (hi - lo) * (hi - lo))
            .sum::<f64>()
            .sqrt()
    }

    pub fn contains(&self, point: &[f64]) -> bool {
        point.len() == self.dim()
            && point
                .iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(p, (lo, hi))| *lo <= *p && *p <= *hi)
    }

    pub fn clamp(&self, point: &mut [f64]) {
        for (p, (lo, hi)) in point.iter_mut().zip(self.lower.iter().zip(&self.upper)) {
            *p = p.clamp(*lo, *hi);
        }
    }
}

/// Regular cell decomposition of a [`Workspace`].
///
/// Cells are stored row-major with the last axis varying fastest, so in 2D the
/// cell `(i0, i1)` has flat index `i0 * cells_per_axis[1] + i1`.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    workspace: Workspace,
    cells_per_axis: Vec<usize>,
    spacing: Vec<f64>,
    centers: Vec<f64>,
}

impl Grid {
    pub fn new(workspace: Workspace, cells_per_axis: Vec<usize>) -> Result<Self> {
        workspace.validate()?;
        if cells_per_axis.len() != workspace.dim() {
            return Err(Error::invalid(format!(
                "grid has {} axes but workspace has dimension {}",
                cells_per_axis.len(),
                workspace.dim()
            )));
        }
        if cells_per_axis.contains(&0) {
            return Err(Error::invalid("grid cells_per_axis entries must be positive"));
        }
        let spacing: Vec<f64> = workspace
            .lower
            .iter()
            .zip(&workspace.upper)
            .zip(&cells_per_axis)
            .map(|((lo, hi), &c)| (hi - lo) / c as f64)
            .collect();
        let axis_centers: Vec<Vec<f64>> = (0..workspace.dim())
            .map(|k| {
                let n = cells_per_axis[k];
                // measured from the nearer edge so mirrored cells mirror exactly
                (0..n)
                    .map(|i| {
                        if 2 * i < n {
                            workspace.lower[k] + (i as f64 + 0.5) * spacing[k]
                        } else {
                            workspace.upper[k] - ((n - i) as f64 - 0.5) * spacing[k]
                        }
                    })
                    .collect()
            })
            .collect();
        let centers = match workspace.dim() {
            1 => axis_centers[0].clone(),
            _ => {
                let mut c = Vec::with_capacity(2 * cells_per_axis[0] * cells_per_axis[1]);
                for &a in &axis_centers[0] {
                    for &b in &axis_centers[1] {
                        c.push(a);
                        c.push(b);
                    }
                }
                c
            }
        };
        Ok(Grid {
            workspace,
            cells_per_axis,
            spacing,
            centers,
        })
    }

    pub fn workspace(&self) -> &Workspace {
        &self.workspace
    }

    pub fn dim(&self) -> usize {
        self.workspace.dim()
    }

    pub fn cells_per_axis(&self) -> &[usize] {
        &self.cells_per_axis
    }

    pub fn spacing(&self) -> &[f64] {
        &self.spacing
    }

    /// Largest spacing over all axes.
    pub fn max_spacing(&self) -> f64 {
        self.spacing.iter().copied().fold(0.0, f64::max)
    }

    pub fn cell_volume(&self) -> f64 {
        self.spacing.iter().product()
    }

    pub fn num_cells(&self) -> usize {
        self.cells_per_axis.iter().product()
    }

    /// Flat `num_cells * dim` array of cell centers.
    pub fn centers(&self) -> &[f64] {
        &self.centers
    }

    pub fn center(&self, cell: usize) -> &[f64] {
        let d = self.dim();
        &self.centers[cell * d..(cell + 1) * d]
    }

    /// Calls `f(a, b)` once for every pair of face-adjacent cells with `a < b`.
    pub fn for_each_adjacent_pair(&self, mut f: impl FnMut(usize, usize)) {
        match self.dim() {
            1 => {
                for c in 1..self.cells_per_axis[0] {
                    f(c - 1, c);
                }
            }
            _ => {
                let (n0, n1) = (self.cells_per_axis[0], self.cells_per_axis[1]);
                for i0 in 0..n0 {
                    for i1 in 0..n1 {
                        let c = i0 * n1 + i1;
                        if i1 + 1 < n1 {
                            f(c, c + 1);
                        }
                        if i0 + 1 < n0 {
                            f(c, c + n1);
                        }
                    }
                }
            }
        }
    }
}

/// Axis-aligned normal distribution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Gaussian {
    pub mean: Vec<f64>,
    /// Diagonal of the covariance matrix.
    pub variance: Vec<f64>,
}

impl Gaussian {
    fn validate(&self) -> Result<()> {
        if self.mean.len() != self.variance.len() || self.mean.is_empty() {
            return Err(Error::invalid("gaussian mean and variance must have equal, nonzero length"));
        }
        if self.mean.iter().any(|m| !m.is_finite()) {
            return Err(Error::invalid("gaussian mean must be finite"));
        }
        if self.variance.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(Error::invalid("gaussian variances must be positive"));
        }
        Ok(())
    }

    fn pdf(&self, point: &[f64]) -> f64 {
        self.mean
            .iter()
            .zip(&self.variance)
            .zip(point)
            .map(|((m, v), p)| {
                let z = p - m;
                (-0.5 * z * z / v).exp() / (2.0 * std::f64::consts::PI * v).sqrt()
            })
            .product()
    }

    fn cdf_1d(&self, y: f64) -> f64 {
        let z = (y - self.mean[0]) / (2.0 * self.variance[0]).sqrt();
        0.5 * (1.0 + erf(z))
    }
}

/// Target density `rho_T` on the plane or the line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Density {
    Gaussian {
        mean: Vec<f64>,
        variance: Vec<f64>,
    },
    Mixture {
        weights: Vec<f64>,
        components: Vec<Gaussian>,
    },
    Uniform {
        lower: Vec<f64>,
        upper: Vec<f64>,
    },
}

impl Density {
    pub fn gaussian(mean: Vec<f64>, variance: Vec<f64>) -> Result<Self> {
        let d = Density::Gaussian { mean, variance };
        d.validate()?;
        Ok(d)
    }

    pub fn mixture(weights: Vec<f64>, components: Vec<Gaussian>) -> Result<Self> {
        let d = Density::Mixture { weights, components };
        d.validate()?;
        Ok(d)
    }

    pub fn uniform(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        let d = Density::Uniform { lower, upper };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Density::Gaussian { mean, variance } => Gaussian {
                mean: mean.clone(),
                variance: variance.clone(),
            }
            .validate(),
            Density::Mixture {
                weights,
                components,
            } => {
                if weights.is_empty() || weights.len() != components.len() {
                    return Err(Error::invalid(
                        "mixture needs one weight per component and at least one component",
                    ));
                }
                if weights.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
                    return Err(Error::invalid("mixture weights must be positive"));
                }
                let total: f64 = weights.iter().sum();
                if (total - 1.0).abs() > 1e-12 {
                    return Err(Error::invalid(format!(
                        "mixture weights sum to {total}, expected 1"
                    )));
                }
                for c in components {
                    c.validate()?;
                    if c.mean.len() != components[0].mean.len() {
                        return Err(Error::invalid("mixture components differ in dimension"));
                    }
                }
                Ok(())
            }
            Density::Uniform { lower, upper } => {
                Workspace::new(lower.clone(), upper.clone()).map(|_| ())
            }
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Density::Gaussian { mean, .. } => mean.len(),
            Density::Mixture { components, .. } => components.first().map_or(0, |c| c.mean.len()),
            Density::Uniform { lower, .. } => lower.len(),
        }
    }

    /// Pointwise density value.
    pub fn eval(&self, point: &[f64]) -> Result<f64> {
        if point.len() != self.dim() {
            return Err(Error::invalid(format!(
                "point has dimension {} but density has dimension {}",
                point.len(),
                self.dim()
            )));
        }
        Ok(self.eval_unchecked(point))
    }

    pub(crate) fn eval_unchecked(&self, point: &[f64]) -> f64 {
        match self {
            Density::Gaussian { mean, variance } => {
                let mut v = 1.0;
                for ((m, s2), p) in mean.iter().zip(variance).zip(point) {
                    let z = p - m;
                    v *= (-0.5 * z * z / s2).exp() / (2.0 * std::f64::consts::PI * s2).sqrt();
                }
                v
            }
            Density::Mixture {
                weights,
                components,
            } => weights
                .iter()
                .zip(components)
                .map(|(w, c)| w * c.pdf(point))
                .sum(),
            Density::Uniform { lower, upper } => {
                let inside = point
                    .iter()
                    .zip(lower.iter().zip(upper))
                    .all(|(p, (lo, hi))| *lo <= *p && *p <= *hi);
                if inside {
                    1.0 / lower.iter().zip(upper).map(|(lo, hi)| hi - lo).product::<f64>()
                } else {
                    0.0
                }
            }
        }
    }

    /// Untruncated cumulative distribution function of a 1D density.
    pub fn cdf_1d(&self, y: f64) -> Result<f64> {
        if self.dim() != 1 {
            return Err(Error::UnsupportedDimension(self.dim()));
        }
        Ok(match self {
            Density::Gaussian { mean, variance } => Gaussian {
                mean: mean.clone(),
                variance: variance.clone(),
            }
            .cdf_1d(y),
            Density::Mixture {
                weights,
                components,
            } => weights
                .iter()
                .zip(components)
                .map(|(w, c)| w * c.cdf_1d(y))
                .sum(),
            Density::Uniform { lower, upper } => ((y - lower[0]) / (upper[0] - lower[0])).clamp(0.0, 1.0),
        })
    }

    /// Midpoint-rule masses over `grid`, renormalized to unit total.
    pub fn discretize(&self, grid: &Grid) -> Result<GridDensity> {
        GridDensity::new(self.clone(), grid.clone())
    }
}

/// A density restricted to a workspace grid, carried as per-cell probability masses.
#[derive(Debug, Clone, PartialEq)]
pub struct GridDensity {
    grid: Grid,
    density: Density,
    cell_mass: Vec<f64>,
    /// Midpoint estimate of the untruncated mass inside the workspace.
    raw_total: f64,
}

impl GridDensity {
    pub fn new(density: Density, grid: Grid) -> Result<Self> {
        density.validate()?;
        if density.dim() != grid.dim() {
            return Err(Error::invalid(format!(
                "density dimension {} does not match grid dimension {}",
                density.dim(),
                grid.dim()
            )));
        }
        let vol = grid.cell_volume();
        let raw: Vec<f64> = grid
            .centers()
            .chunks_exact(grid.dim())
            .map(|c| density.eval_unchecked(c) * vol)
            .collect();
        let raw_total: f64 = raw.iter().sum();
        if !(raw_total > 0.0 && raw_total.is_finite()) {
            return Err(Error::DegenerateDensity(raw_total));
        }
        let cell_mass = raw.into_iter().map(|m| m / raw_total).collect();
        Ok(GridDensity {
            grid,
            density,
            cell_mass,
            raw_total,
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn density(&self) -> &Density {
        &self.density
    }

    pub fn cell_mass(&self) -> &[f64] {
        &self.cell_mass
    }

    pub fn total_mass(&self) -> f64 {
        self.cell_mass.iter().sum()
    }

    pub fn max_cell_mass(&self) -> f64 {
        self.cell_mass.iter().copied().fold(0.0, f64::max)
    }

    /// Truncated, renormalized density evaluated at an arbitrary point;
    /// zero outside the workspace.
    pub fn pdf(&self, point: &[f64]) -> f64 {
        if !self.grid.workspace().contains(point) {
            return 0.0;
        }
        self.density.eval_unchecked(point) / self.raw_total
    }

    /// Total mass of the cells whose centers satisfy `pred`.
    pub fn mass_where(&self, mut pred: impl FnMut(&[f64]) -> bool) -> f64 {
        self.grid
            .centers()
            .chunks_exact(self.grid.dim())
            .zip(&self.cell_mass)
            .filter(|(c, _)| pred(c))
            .map(|(_, m)| m)
            .sum()
    }

    /// Mass-weighted mean of the cell centers.
    pub fn mean(&self) -> Vec<f64> {
        let d = self.grid.dim();
        let mut acc = vec![0.0; d];
        for (c, m) in self.grid.centers().chunks_exact(d).zip(&self.cell_mass) {
            for k in 0..d {
                acc[k] += m * c[k];
            }
        }
        acc
    }
}
