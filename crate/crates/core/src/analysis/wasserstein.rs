//! Exact semi-discrete transport cost on the line, used as an oracle for `max_phi F`.
//!
//! On the line the optimal plan sends the `k`-th robot (in sorted order) the
//! mass between the `(k-1)/n` and `k/n` quantiles of the target, so the
//! transport cost follows from quantiles and 1D quadrature alone.

use serde::Serialize;

use crate::control::{dual_value, grad_phi};
use crate::density::{Density, GridDensity, Workspace};
use crate::error::{Error, Result};
use crate::tessellation::{SwarmState, Tessellation};

/// Quadrature subintervals spread over the whole workspace.
const QUADRATURE_INTERVALS: f64 = 200_000.0;
const MIN_SEGMENT_INTERVALS: usize = 64;
const CDF_TOL: f64 = 1e-10;

/// Half-squared-distance transport cost between `n` equal point masses at
/// `positions` and `density` truncated to `workspace`.
pub fn wasserstein_1d(positions: &[f64], density: &Density, workspace: &Workspace) -> Result<f64> {
    if density.dim() != 1 {
        return Err(Error::UnsupportedDimension(density.dim()));
    }
    if workspace.dim() != 1 {
        return Err(Error::UnsupportedDimension(workspace.dim()));
    }
    if positions.is_empty() {
        return Err(Error::invalid("no robot positions given"));
    }
    let (lo, hi) = (workspace.lower[0], workspace.upper[0]);
    let cdf_lo = density.cdf_1d(lo)?;
    let total = density.cdf_1d(hi)? - cdf_lo;
    if total.is_nan() || total <= 0.0 {
        return Err(Error::DegenerateDensity(total));
    }
    let cdf = |y: f64| -> Result<f64> { Ok((density.cdf_1d(y)? - cdf_lo) / total) };

    let mut sorted = positions.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();

    let mut edges = Vec::with_capacity(n + 1);
    edges.push(lo);
    for k in 1..n {
        edges.push(quantile(&cdf, k as f64 / n as f64, lo, hi)?);
    }
    edges.push(hi);

    let mut cost = 0.0;
    for (k, &x) in sorted.iter().enumerate() {
        let (a, b) = (edges[k], edges[k + 1]);
        let intervals = ((b - a) / (hi - lo) * QUADRATURE_INTERVALS).ceil() as usize;
        let intervals = intervals.max(MIN_SEGMENT_INTERVALS);
        cost += simpson(|y| 0.5 * (y - x) * (y - x) * density.eval_unchecked(&[y]), a, b, intervals);
    }
    Ok(cost / total)
}

fn quantile(cdf: &impl Fn(f64) -> Result<f64>, target: f64, lo: f64, hi: f64) -> Result<f64> {
    let (mut a, mut b) = (lo, hi);
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        let v = cdf(mid)?;
        if (v - target).abs() < CDF_TOL || b - a <= f64::EPSILON * (hi - lo) {
            return Ok(mid);
        }
        if v < target {
            a = mid;
        } else {
            b = mid;
        }
    }
    Ok(0.5 * (a + b))
}

/// Composite Simpson rule with `intervals` rounded up to an even count.
fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, intervals: usize) -> f64 {
    let m = intervals + intervals % 2;
    let h = (b - a) / m as f64;
    let mut acc = f(a) + f(b);
    for i in 1..m {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(a + i as f64 * h);
    }
    acc * h / 3.0
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DualityGap {
    /// `F` after the weight ascent.
    pub max_f: f64,
    pub oracle_w: f64,
    pub gap: f64,
    pub steps: usize,
    pub converged: bool,
    /// `F` before every ascent step, and after the last.
    #[serde(skip)]
    pub f_history: Vec<f64>,
}

const DECREASE_LIMIT: usize = 10;

struct Ascent {
    history: Vec<f64>,
    steps: usize,
    converged: bool,
}

/// Fixed-rate gradient ascent; `eval` returns the objective and its gradient.
fn ascend(
    weights: &mut [f64],
    max_steps: usize,
    rate: f64,
    tol: f64,
    mut eval: impl FnMut(&[f64]) -> Result<(f64, Vec<f64>)>,
) -> Result<Ascent> {
    let mut history: Vec<f64> = Vec::new();
    let mut decreasing = 0;
    let mut steps = 0;
    loop {
        let (f, g) = eval(weights)?;
        if let Some(&prev) = history.last() {
            if f < prev {
                decreasing += 1;
                if decreasing >= DECREASE_LIMIT {
                    return Err(Error::AscentFailure(decreasing));
                }
            } else {
                decreasing = 0;
            }
        }
        history.push(f);
        if g.iter().all(|v| v.abs() < tol) {
            return Ok(Ascent { history, steps, converged: true });
        }
        if steps >= max_steps {
            return Ok(Ascent { history, steps, converged: false });
        }
        for (w, gi) in weights.iter_mut().zip(&g) {
            *w += rate * gi;
        }
        steps += 1;
    }
}

/// Gradient ascent of `F(x, .)` at fixed positions, compared with [`wasserstein_1d`].
///
/// Stops once every `|1/n - a_i|` drops below `1e-3 / n` or after `ascent_steps`.
pub fn duality_gap_1d(
    positions: &[f64],
    grid_density: &GridDensity,
    ascent_steps: usize,
    ascent_rate: f64,
) -> Result<DualityGap> {
    if grid_density.grid().dim() != 1 {
        return Err(Error::UnsupportedDimension(grid_density.grid().dim()));
    }
    if !(ascent_rate > 0.0 && ascent_rate.is_finite()) {
        return Err(Error::invalid("ascent rate must be positive"));
    }
    let n = positions.len();
    let mut state = SwarmState::new(1, positions.to_vec(), vec![0.0; n])?;
    let mut weights = vec![0.0; n];
    let ascent = ascend(&mut weights, ascent_steps, ascent_rate, 1e-3 / n as f64, |phi| {
        state.weights.copy_from_slice(phi);
        let tess = Tessellation::build(grid_density, &state)?;
        Ok((dual_value(&state, &tess, grid_density), grad_phi(&tess, n)))
    })?;
    let max_f = *ascent.history.last().expect("at least one evaluation");
    let oracle_w = wasserstein_1d(positions, grid_density.density(), grid_density.grid().workspace())?;
    Ok(DualityGap {
        max_f,
        oracle_w,
        gap: (max_f - oracle_w).abs(),
        steps: ascent.steps,
        converged: ascent.converged,
        f_history: ascent.history,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::Grid;

    fn unit() -> Workspace {
        Workspace::new(vec![0.0], vec![1.0]).unwrap()
    }

    #[test]
    fn single_robot_at_center_of_unit_interval() {
        let u = Density::uniform(vec![0.0], vec![1.0]).unwrap();
        let w = wasserstein_1d(&[0.5], &u, &unit()).unwrap();
        assert!((w - 1.0 / 24.0).abs() < 1e-12);
    }

    #[test]
    fn two_robots_on_unit_interval() {
        let u = Density::uniform(vec![0.0], vec![1.0]).unwrap();
        let w = wasserstein_1d(&[0.75, 0.25], &u, &unit()).unwrap();
        assert!((w - 1.0 / 96.0).abs() < 1e-12);
    }

    #[test]
    fn gaussian_single_robot_matches_moment() {
        // truncation at +-10 of a variance-3 gaussian is negligible
        let g = Density::gaussian(vec![0.0], vec![3.0]).unwrap();
        let ws = Workspace::new(vec![-10.0], vec![10.0]).unwrap();
        let w = wasserstein_1d(&[1.0], &g, &ws).unwrap();
        assert!((w - 0.5 * (3.0 + 1.0)).abs() < 1e-6);
    }

    #[test]
    fn rejects_two_dimensions() {
        let g = Density::gaussian(vec![0.0, 0.0], vec![1.0, 1.0]).unwrap();
        assert_eq!(
            wasserstein_1d(&[0.0], &g, &unit()).unwrap_err(),
            Error::UnsupportedDimension(2)
        );
    }

    #[test]
    fn ascent_on_two_uniform_robots() {
        let grid = Grid::new(unit(), vec![4000]).unwrap();
        let gd = Density::uniform(vec![0.0], vec![1.0])
            .unwrap()
            .discretize(&grid)
            .unwrap();
        let r = duality_gap_1d(&[0.25, 0.75], &gd, 1000, 0.05).unwrap();
        assert!(r.converged);
        assert!((r.max_f - 1.0 / 96.0).abs() < 1e-4);
        assert!(r.gap < 1e-4);
    }

    #[test]
    fn ascent_divergence_is_reported() {
        // gradient with the wrong sign: every step lowers -|w|^2
        let mut w = vec![1.0];
        let r = ascend(&mut w, 100, 0.1, 1e-9, |w| Ok((-w[0] * w[0], vec![w[0]])));
        assert_eq!(r.err(), Some(Error::AscentFailure(DECREASE_LIMIT)));
    }

    #[test]
    fn ascent_on_a_concave_quadratic() {
        let mut w = vec![3.0, -1.0];
        let r = ascend(&mut w, 1000, 0.25, 1e-9, |w| {
            Ok((-(w[0] * w[0] + w[1] * w[1]), vec![-2.0 * w[0], -2.0 * w[1]]))
        })
        .unwrap();
        assert!(r.converged);
        assert!(r.history.windows(2).all(|p| p[1] >= p[0]));
        assert!(w.iter().all(|v| v.abs() < 1e-9));
    }
}
