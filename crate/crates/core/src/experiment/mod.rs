//! Experiment configuration, execution and artifact output.
//!
//! A run writes, under the output directory and prefixed by the law name,
//! `<law>_trajectory.csv`, `<law>_cells.csv` (final cell owners) and
//! `<law>_summary.json`, plus the resolved `config.json`. A comparison runs
//! both laws and adds `comparison.json`.

mod config;
pub mod output;

pub use config::{
    ExperimentConfig, Experiment, GridSpec, InitialSpec, SimulationSpec, DEFAULT_CELLS_1D, DEFAULT_CELLS_2D,
    DEFAULT_DT, DEFAULT_MAX_TIME_1D, DEFAULT_MAX_TIME_2D, DEFAULT_RECORD_EVERY, OUT_DIR_ENV,
};

use serde::Serialize;

use crate::analysis::{
    cost_j, duality_gap_1d, epsilon_mono, monotonicity_audit, stability_report, DualityGap, MonotonicityReport,
    StabilityReport,
};
use crate::control::{dual_value, ControllerParams, Law};
use crate::density::GridDensity;
use crate::error::Result;
use crate::simulate::{run, TrajectoryRecord};
use crate::tessellation::{required_range, SwarmState, Tessellation};

pub const DUALITY_ASCENT_STEPS: usize = 20_000;
pub const DUALITY_ASCENT_RATE: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub name: String,
    pub law: Law,
    pub dimension: usize,
    pub robots: usize,
    pub steps: usize,
    pub final_time: f64,
    pub steady_state_reached: bool,
    /// Coverage cost over Voronoi regions.
    pub cost_j: f64,
    /// Coverage cost over the final Laguerre regions.
    pub cost_j_laguerre: f64,
    pub f_value: f64,
    pub mean_position: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub upper_right_count: Option<usize>,
    pub required_range: Vec<f64>,
    #[serde(flatten)]
    pub stability: StabilityReport,
    pub monotonicity: MonotonicityReport,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Comparison {
    pub name: String,
    #[serde(rename = "J_vtcc")]
    pub j_vtcc: f64,
    #[serde(rename = "J_otcc")]
    pub j_otcc: f64,
    pub otcc_better: bool,
    #[serde(rename = "J_vtcc_laguerre")]
    pub j_vtcc_laguerre: f64,
    #[serde(rename = "J_otcc_laguerre")]
    pub j_otcc_laguerre: f64,
    pub mean_vtcc: Vec<f64>,
    pub mean_otcc: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub upper_right_vtcc: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub upper_right_otcc: Option<usize>,
    /// Weight ascent at the final OTCC positions against the exact transport cost (1D only).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub duality: Option<DualityGap>,
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub trajectory: TrajectoryRecord,
    pub summary: Summary,
}

#[derive(Debug, Clone)]
pub struct CompareOutput {
    pub vtcc: RunOutput,
    pub otcc: RunOutput,
    pub comparison: Comparison,
}

/// Robots with every coordinate strictly positive.
pub fn upper_right_count(state: &SwarmState) -> usize {
    (0..state.len())
        .filter(|&i| state.position(i).iter().all(|&c| c > 0.0))
        .count()
}

pub fn mean_position(state: &SwarmState) -> Vec<f64> {
    let d = state.dim();
    let mut m = vec![0.0; d];
    for i in 0..state.len() {
        for (acc, x) in m.iter_mut().zip(state.position(i)) {
            *acc += x;
        }
    }
    m.iter_mut().for_each(|v| *v /= state.len() as f64);
    m
}

/// Simulates one law and evaluates the final state, without touching the filesystem.
pub fn simulate_law(exp: &Experiment, params: &ControllerParams) -> Result<RunOutput> {
    let trajectory = run(exp.initial.clone(), &exp.sim, params, &exp.grid_density)?;
    let summary = summarize(exp, &trajectory)?;
    Ok(RunOutput { trajectory, summary })
}

fn summarize(exp: &Experiment, traj: &TrajectoryRecord) -> Result<Summary> {
    let gd = &exp.grid_density;
    let state = &traj.final_state;
    let tess = Tessellation::build(gd, state)?;
    let stability = stability_report(state, gd)?;
    Ok(Summary {
        name: exp.config.name.clone(),
        law: traj.law,
        dimension: traj.dim,
        robots: state.len(),
        steps: traj.steps,
        final_time: state.time,
        steady_state_reached: traj.steady_state_reached,
        cost_j: cost_j(state, gd, true)?,
        cost_j_laguerre: cost_j(state, gd, false)?,
        f_value: dual_value(state, &tess, gd),
        mean_position: mean_position(state),
        upper_right_count: (traj.dim == 2).then(|| upper_right_count(state)),
        required_range: (0..state.len())
            .map(|i| required_range(state, &tess.neighbor_sets, i))
            .collect(),
        stability,
        monotonicity: monotonicity_audit(traj, epsilon_mono(gd)),
    })
}

fn write_run(exp: &Experiment, out: &RunOutput) -> Result<()> {
    let dir = exp.output_dir();
    let prefix = out.trajectory.law.as_str();
    let gd: &GridDensity = &exp.grid_density;
    let state = &out.trajectory.final_state;
    let tess = Tessellation::build(gd, state)?;
    let summary = output::json_bytes(&out.summary)?;
    output::write_atomic(
        &dir.join(format!("{prefix}_trajectory.csv")),
        &output::trajectory_csv(&out.trajectory)?,
    )?;
    output::write_atomic(
        &dir.join(format!("{prefix}_cells.csv")),
        &output::cells_csv(state.time, gd.grid().centers(), state.dim(), &tess.owner)?,
    )?;
    output::write_atomic(&dir.join(format!("{prefix}_summary.json")), &summary)?;
    Ok(())
}

fn write_config(exp: &Experiment) -> Result<()> {
    output::write_atomic(&exp.output_dir().join("config.json"), exp.config.to_json().as_bytes())
}

/// Runs the configured law and writes its artifacts.
pub fn run_experiment(exp: &Experiment) -> Result<RunOutput> {
    let out = simulate_law(exp, &exp.params)?;
    write_config(exp)?;
    write_run(exp, &out)?;
    Ok(out)
}

/// Runs both laws from the same initial state, writes both artifact sets and `comparison.json`.
pub fn compare(exp: &Experiment) -> Result<CompareOutput> {
    let vtcc = simulate_law(exp, &ControllerParams { law: Law::Vtcc, ..exp.params })?;
    let otcc = simulate_law(exp, &ControllerParams { law: Law::Otcc, ..exp.params })?;
    let duality = if exp.config.dimension == 1 {
        Some(duality_gap_1d(
            &otcc.trajectory.final_state.positions,
            &exp.grid_density,
            DUALITY_ASCENT_STEPS,
            DUALITY_ASCENT_RATE,
        )?)
    } else {
        None
    };
    let comparison = Comparison {
        name: exp.config.name.clone(),
        j_vtcc: vtcc.summary.cost_j,
        j_otcc: otcc.summary.cost_j,
        otcc_better: otcc.summary.cost_j < vtcc.summary.cost_j,
        j_vtcc_laguerre: vtcc.summary.cost_j_laguerre,
        j_otcc_laguerre: otcc.summary.cost_j_laguerre,
        mean_vtcc: vtcc.summary.mean_position.clone(),
        mean_otcc: otcc.summary.mean_position.clone(),
        upper_right_vtcc: vtcc.summary.upper_right_count,
        upper_right_otcc: otcc.summary.upper_right_count,
        duality,
    };
    let bytes = output::json_bytes(&comparison)?;
    write_config(exp)?;
    write_run(exp, &vtcc)?;
    write_run(exp, &otcc)?;
    output::write_atomic(&exp.output_dir().join("comparison.json"), &bytes)?;
    Ok(CompareOutput { vtcc, otcc, comparison })
}
