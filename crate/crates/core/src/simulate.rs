//! Explicit Euler integration of the coupled position/weight dynamics.

use serde::{Deserialize, Serialize};

use crate::control::{control_step, dual_value, transport_cost, ControlOutput, ControllerParams, Law};
use crate::density::GridDensity;
use crate::error::{Error, Result};
use crate::tessellation::{assign_voronoi, SwarmState, Tessellation};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub dt: f64,
    pub max_time: f64,
    /// Steps between trajectory records.
    pub record_every: usize,
    /// Steady state requires every `|u_i|` below this.
    pub steady_u_tol: f64,
    /// Steady state requires every `|phi_dot_i|` at or below this.
    pub steady_phi_tol: f64,
    /// Record split-step values of `F` for the monotonicity audit.
    #[serde(default)]
    pub probe_monotonicity: bool,
}

impl SimConfig {
    pub fn validate(&self, params: &ControllerParams) -> Result<()> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::invalid(format!("simulation.dt = {} must be positive", self.dt)));
        }
        if !(self.max_time.is_finite() && self.max_time > 0.0) {
            return Err(Error::invalid(format!(
                "simulation.max_time = {} must be positive",
                self.max_time
            )));
        }
        if self.max_time < self.dt {
            return Err(Error::invalid(format!(
                "simulation.max_time = {} is shorter than one step of {}",
                self.max_time, self.dt
            )));
        }
        if self.record_every == 0 {
            return Err(Error::invalid("simulation.record_every must be positive"));
        }
        if !(self.steady_u_tol.is_finite() && self.steady_u_tol > 0.0) {
            return Err(Error::invalid("simulation.steady_u_tol must be positive"));
        }
        if !(self.steady_phi_tol.is_finite() && self.steady_phi_tol >= 0.0) {
            return Err(Error::invalid("simulation.steady_phi_tol must be non-negative"));
        }
        if self.dt * params.k >= 1.0 {
            return Err(Error::invalid(format!(
                "simulation.dt * controller.k = {} must stay below 1",
                self.dt * params.k
            )));
        }
        Ok(())
    }

    /// Number of Euler steps needed to reach `max_time`.
    pub fn max_steps(&self) -> usize {
        (self.max_time / self.dt - 1e-9).ceil() as usize
    }
}

/// Values of `F` around one Euler step, used to check the descent/ascent signs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitProbe {
    /// `F(x_t, phi_t)`
    pub base: f64,
    /// `F(x_{t+dt}, phi_t)`
    pub moved_x: f64,
    /// `F(x_t, phi_{t+dt})`
    pub moved_phi: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Record {
    pub step: usize,
    pub time: f64,
    pub positions: Vec<f64>,
    pub weights: Vec<f64>,
    pub mass: Vec<f64>,
    pub centroid: Vec<f64>,
    pub f_value: f64,
    /// Coverage cost over Voronoi regions.
    pub cost_j: f64,
    pub u_norm: Vec<f64>,
    pub probe: Option<SplitProbe>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryRecord {
    pub law: Law,
    pub dim: usize,
    pub records: Vec<Record>,
    pub final_state: SwarmState,
    pub steps: usize,
    pub steady_state_reached: bool,
}

impl TrajectoryRecord {
    pub fn last(&self) -> &Record {
        self.records.last().expect("a trajectory always holds its final record")
    }
}

/// Applies one Euler update with a precomputed control output.
fn advance(
    state: &SwarmState,
    out: &ControlOutput,
    params: &ControllerParams,
    dt: f64,
    grid_density: &GridDensity,
    step: usize,
) -> Result<SwarmState> {
    let mut next = state.clone();
    for (x, u) in next.positions.iter_mut().zip(&out.u) {
        *x += dt * u;
    }
    if params.law == Law::Otcc {
        for (phi, pd) in next.weights.iter_mut().zip(&out.phi_dot) {
            *phi += dt * pd;
        }
    }
    let d = state.dim();
    let ws = grid_density.grid().workspace();
    for i in 0..next.len() {
        let p = next.position_mut(i);
        if p.iter().any(|c| !c.is_finite()) || !next.weights[i].is_finite() {
            return Err(Error::NumericalBlowup { step, robot: i });
        }
        ws.clamp(&mut next.positions[i * d..(i + 1) * d]);
    }
    next.time = (step + 1) as f64 * dt;
    Ok(next)
}

/// Advances `state` by one step of length `dt`.
pub fn step(
    state: &SwarmState,
    params: &ControllerParams,
    dt: f64,
    grid_density: &GridDensity,
) -> Result<SwarmState> {
    let tess = Tessellation::build(grid_density, state)?;
    let out = control_step(state, &tess, grid_density, params);
    let index = (state.time / dt).round() as usize;
    let mut next = advance(state, &out, params, dt, grid_density, index)?;
    next.time = state.time + dt;
    Ok(next)
}

fn validate_initial(state: &SwarmState, grid_density: &GridDensity) -> Result<()> {
    let ws = grid_density.grid().workspace();
    if state.dim() != ws.dim() {
        return Err(Error::invalid(format!(
            "initial positions have dimension {} but the workspace has {}",
            state.dim(),
            ws.dim()
        )));
    }
    for i in 0..state.len() {
        if !ws.contains(state.position(i)) {
            return Err(Error::invalid(format!(
                "initial position of robot {i} lies outside the workspace"
            )));
        }
    }
    if let Some((i, j)) = state.coincident_pair() {
        return Err(Error::DegenerateConfiguration(i, j));
    }
    Ok(())
}

/// Integrates from `initial` until steady state or `config.max_time`.
pub fn run(
    initial: SwarmState,
    config: &SimConfig,
    params: &ControllerParams,
    grid_density: &GridDensity,
) -> Result<TrajectoryRecord> {
    params.validate()?;
    config.validate(params)?;
    validate_initial(&initial, grid_density)?;

    let dim = initial.dim();
    let max_steps = config.max_steps();
    let mut state = initial;
    state.time = 0.0;
    let mut records = Vec::new();
    let mut step_index = 0;
    let steady = loop {
        let tess = Tessellation::build(grid_density, &state)?;
        let out = control_step(&state, &tess, grid_density, params);
        let steady = out.max_u_norm(dim) < config.steady_u_tol
            && out.max_phi_dot() <= config.steady_phi_tol;
        let done = steady || step_index >= max_steps;
        let next = if done {
            None
        } else {
            Some(advance(&state, &out, params, config.dt, grid_density, step_index)?)
        };
        if done || step_index % config.record_every == 0 {
            let probe = match (&next, config.probe_monotonicity) {
                (Some(next), true) => Some(split_probe(&state, next, out.f_value, grid_density)?),
                _ => None,
            };
            let voronoi = assign_voronoi(grid_density.grid(), &state)?;
            records.push(Record {
                step: step_index,
                time: state.time,
                positions: state.positions.clone(),
                weights: state.weights.clone(),
                mass: tess.mass.clone(),
                centroid: tess.centroid.clone(),
                f_value: out.f_value,
                cost_j: transport_cost(&state, &voronoi, grid_density),
                u_norm: out.u_norms(dim),
                probe,
            });
        }
        match next {
            Some(next) => {
                state = next;
                step_index += 1;
            }
            None => break steady,
        }
    };
    Ok(TrajectoryRecord {
        law: params.law,
        dim,
        records,
        final_state: state,
        steps: step_index,
        steady_state_reached: steady,
    })
}

fn split_probe(
    state: &SwarmState,
    next: &SwarmState,
    base: f64,
    grid_density: &GridDensity,
) -> Result<SplitProbe> {
    let mut moved_x = next.clone();
    moved_x.weights.clone_from(&state.weights);
    let mut moved_phi = state.clone();
    moved_phi.weights.clone_from(&next.weights);
    let value = |s: &SwarmState| -> Result<f64> {
        let t = Tessellation::build(grid_density, s)?;
        Ok(dual_value(s, &t, grid_density))
    };
    Ok(SplitProbe {
        base,
        moved_x: value(&moved_x)?,
        moved_phi: value(&moved_phi)?,
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

    fn config(max_time: f64) -> SimConfig {
        SimConfig {
            dt: 0.1,
            max_time,
            record_every: 5,
            steady_u_tol: 1e-3,
            steady_phi_tol: 1e-9,
            probe_monotonicity: true,
        }
    }

    #[test]
    fn single_euler_step() {
        let gd = gaussian_line();
        let s = SwarmState::from_points(&[vec![2.0]]).unwrap();
        let next = step(&s, &ControllerParams::otcc(0.5, 1e-4).unwrap(), 0.1, &gd).unwrap();
        // centroid of the symmetric truncated gaussian is 0
        assert!((next.positions[0] - 1.9).abs() < 1e-12);
        assert!((next.time - 0.1).abs() < 1e-15);
    }

    #[test]
    fn vtcc_keeps_initial_weights() {
        let gd = gaussian_line();
        let s = SwarmState::from_points(&[vec![-3.0], vec![1.0]])
            .unwrap()
            .with_weights(vec![0.2, -0.1])
            .unwrap();
        let traj = run(s, &config(5.0), &ControllerParams::vtcc(0.5).unwrap(), &gd).unwrap();
        for r in &traj.records {
            assert_eq!(r.weights, vec![0.2, -0.1]);
        }
    }

    #[test]
    fn single_robot_converges_to_the_mean() {
        let gd = gaussian_line();
        let s = SwarmState::from_points(&[vec![-6.0]]).unwrap();
        let cfg = config(200.0);
        let traj = run(s, &cfg, &ControllerParams::otcc(0.5, 1e-2).unwrap(), &gd).unwrap();
        assert!(traj.steady_state_reached);
        assert!(traj.last().u_norm[0] < cfg.steady_u_tol);
        assert!(traj.final_state.positions[0].abs() < 2.0 * cfg.steady_u_tol / 0.5);
        let times: Vec<f64> = traj.records.iter().map(|r| r.time).collect();
        assert!(times.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn equilibrium_start_stays_put() {
        let gd = gaussian_line();
        let mean = gd.mean()[0];
        let s = SwarmState::from_points(&[vec![mean]]).unwrap();
        let next = step(&s, &ControllerParams::otcc(0.5, 1.0).unwrap(), 0.1, &gd).unwrap();
        assert!((next.positions[0] - s.positions[0]).abs() < 1e-15);
        assert!((next.weights[0] - s.weights[0]).abs() < 1e-14);
    }

    #[test]
    fn invalid_configs() {
        let gd = gaussian_line();
        let s = SwarmState::from_points(&[vec![0.0]]).unwrap();
        let p = ControllerParams::otcc(0.5, 1e-4).unwrap();
        let mut c = config(1.0);
        c.max_time = 0.05;
        assert!(matches!(run(s.clone(), &c, &p, &gd), Err(Error::InvalidArgument(_))));
        let mut c = config(1.0);
        c.dt = 2.5;
        c.max_time = 10.0;
        assert!(run(s.clone(), &c, &p, &gd).is_err());
        let outside = SwarmState::from_points(&[vec![11.0]]).unwrap();
        assert!(run(outside, &config(1.0), &p, &gd).is_err());
    }

    #[test]
    fn blowup_is_reported() {
        let gd = gaussian_line();
        let s = SwarmState::from_points(&[vec![0.0], vec![1.0]]).unwrap();
        let p = ControllerParams::otcc(0.5, f64::MAX).unwrap();
        let tess = Tessellation::build(&gd, &s).unwrap();
        let mut out = control_step(&s, &tess, &gd, &p);
        out.phi_dot[1] = f64::INFINITY;
        assert_eq!(
            advance(&s, &out, &p, 0.1, &gd, 7).unwrap_err(),
            Error::NumericalBlowup { step: 7, robot: 1 }
        );
    }
}
