use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::control::ControllerParams;
use crate::density::{Density, Grid, GridDensity, Workspace};
use crate::error::{Error, Result};
use crate::simulate::SimConfig;
use crate::tessellation::SwarmState;

pub const DEFAULT_CELLS_1D: usize = 2000;
pub const DEFAULT_CELLS_2D: usize = 200;
pub const DEFAULT_DT: f64 = 0.1;
pub const DEFAULT_MAX_TIME_1D: f64 = 5000.0;
pub const DEFAULT_MAX_TIME_2D: f64 = 500.0;
pub const DEFAULT_RECORD_EVERY: usize = 10;
pub const OUT_DIR_ENV: &str = "OTCC_OUT_DIR";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub cells: Vec<usize>,
}

/// Simulation settings; missing entries are filled by [`ExperimentConfig::resolve`].
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_time: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub record_every: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub steady_u_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub steady_phi_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probe_monotonicity: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialSpec {
    /// Evenly spaced points spanning `[lower, upper]` inclusive, `counts` per axis.
    Lattice {
        lower: Vec<f64>,
        upper: Vec<f64>,
        counts: Vec<usize>,
    },
    Explicit {
        positions: Vec<Vec<f64>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        weights: Option<Vec<f64>>,
    },
}

impl InitialSpec {
    pub fn build(&self, dim: usize) -> Result<SwarmState> {
        match self {
            InitialSpec::Lattice { lower, upper, counts } => {
                if lower.len() != dim || upper.len() != dim || counts.len() != dim {
                    return Err(Error::Config(format!(
                        "initial: lattice lower, upper and counts must all have length {dim}"
                    )));
                }
                let axes = (0..dim)
                    .map(|k| linspace(lower[k], upper[k], counts[k]))
                    .collect::<Result<Vec<_>>>()?;
                let points: Vec<Vec<f64>> = match dim {
                    1 => axes[0].iter().map(|&x| vec![x]).collect(),
                    _ => axes[0]
                        .iter()
                        .flat_map(|&a| axes[1].iter().map(move |&b| vec![a, b]))
                        .collect(),
                };
                SwarmState::from_points(&points)
            }
            InitialSpec::Explicit { positions, weights } => {
                if let Some(p) = positions.iter().position(|p| p.len() != dim) {
                    return Err(Error::Config(format!("initial.positions[{p}] must have length {dim}")));
                }
                let state = SwarmState::from_points(positions)?;
                match weights {
                    Some(w) => state.with_weights(w.clone()),
                    None => Ok(state),
                }
            }
        }
    }
}

fn linspace(lo: f64, hi: f64, count: usize) -> Result<Vec<f64>> {
    match count {
        0 => Err(Error::Config("initial.counts entries must be positive".into())),
        1 => Ok(vec![0.5 * (lo + hi)]),
        _ => {
            let step = (hi - lo) / (count - 1) as f64;
            Ok((0..count)
                .map(|i| if i + 1 == count { hi } else { lo + i as f64 * step })
                .collect())
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    pub dimension: usize,
    pub workspace: Workspace,
    pub density: Density,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridSpec>,
    pub controller: ControllerParams,
    #[serde(default)]
    pub simulation: SimulationSpec,
    pub initial: InitialSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
}

/// Everything needed to run one experiment.
#[derive(Debug, Clone)]
pub struct Experiment {
    /// Resolved configuration with every default filled in.
    pub config: ExperimentConfig,
    pub grid_density: GridDensity,
    pub initial: SwarmState,
    pub params: ControllerParams,
    pub sim: SimConfig,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let inner = e.into_inner();
            if path == "." || path.is_empty() {
                Error::Config(inner.to_string())
            } else {
                Error::Config(format!("field `{path}`: {inner}"))
            }
        })
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("configuration serializes") + "\n"
    }

    /// Fills defaults, picks the output directory and validates the result.
    ///
    /// Output directory precedence: `out_override`, then `output_dir`, then
    /// `$OTCC_OUT_DIR/<name>`, then `out/<name>`.
    pub fn resolve(&self, out_override: Option<&Path>) -> Result<Experiment> {
        let mut cfg = self.clone();
        if cfg.name.is_empty()
            || !cfg
                .name
                .chars()
                .all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-' || c == '.')
        {
            return Err(Error::Config(format!(
                "field `name`: {:?} must be non-empty and use only [A-Za-z0-9_.-]",
                cfg.name
            )));
        }
        if !(1..=2).contains(&cfg.dimension) {
            return Err(Error::Config(format!("field `dimension`: {} must be 1 or 2", cfg.dimension)));
        }
        let d = cfg.dimension;
        cfg.workspace.validate().map_err(|e| field("workspace", e))?;
        if cfg.workspace.dim() != d {
            return Err(Error::Config(format!(
                "field `workspace`: has dimension {} but `dimension` is {d}",
                cfg.workspace.dim()
            )));
        }
        cfg.density.validate().map_err(|e| field("density", e))?;
        if cfg.density.dim() != d {
            return Err(Error::Config(format!(
                "field `density`: has dimension {} but `dimension` is {d}",
                cfg.density.dim()
            )));
        }
        let default_cells = if d == 1 { DEFAULT_CELLS_1D } else { DEFAULT_CELLS_2D };
        let grid_spec = cfg.grid.get_or_insert_with(|| GridSpec {
            cells: vec![default_cells; d],
        });
        if grid_spec.cells.len() != d {
            return Err(Error::Config(format!("field `grid.cells`: must have length {d}")));
        }
        let grid = Grid::new(cfg.workspace.clone(), grid_spec.cells.clone()).map_err(|e| field("grid", e))?;
        cfg.controller.validate().map_err(|e| field("controller", e))?;

        let initial = cfg.initial.build(d).map_err(|e| field("initial", e))?;
        let n = initial.len() as f64;
        let sim_spec = &mut cfg.simulation;
        let dt = *sim_spec.dt.get_or_insert(DEFAULT_DT);
        let default_max = if d == 1 { DEFAULT_MAX_TIME_1D } else { DEFAULT_MAX_TIME_2D };
        let max_time = *sim_spec.max_time.get_or_insert(default_max);
        let record_every = *sim_spec.record_every.get_or_insert(DEFAULT_RECORD_EVERY);
        let steady_u_tol = *sim_spec
            .steady_u_tol
            .get_or_insert(1e-4 * cfg.controller.k * cfg.workspace.diameter());
        let steady_phi_tol = *sim_spec
            .steady_phi_tol
            .get_or_insert(1e-3 * cfg.controller.k_prime / n);
        let probe_monotonicity = *sim_spec.probe_monotonicity.get_or_insert(false);
        let sim = SimConfig {
            dt,
            max_time,
            record_every,
            steady_u_tol,
            steady_phi_tol,
            probe_monotonicity,
        };
        sim.validate(&cfg.controller).map_err(|e| field("simulation", e))?;

        for i in 0..initial.len() {
            if !cfg.workspace.contains(initial.position(i)) {
                return Err(Error::Config(format!(
                    "field `initial`: robot {i} at {:?} lies outside the workspace",
                    initial.position(i)
                )));
            }
        }
        let grid_density = cfg.density.discretize(&grid).map_err(|e| field("density", e))?;

        let out = match (out_override, &cfg.output_dir) {
            (Some(p), _) => p.to_path_buf(),
            (None, Some(p)) => p.clone(),
            (None, None) => match std::env::var_os(OUT_DIR_ENV) {
                Some(root) if !root.is_empty() => PathBuf::from(root).join(&cfg.name),
                _ => PathBuf::from("out").join(&cfg.name),
            },
        };
        cfg.output_dir = Some(out);
        let params = cfg.controller;
        Ok(Experiment {
            config: cfg,
            grid_density,
            initial,
            params,
            sim,
        })
    }
}

fn field(name: &str, err: Error) -> Error {
    match err {
        Error::Config(msg) if msg.starts_with("field") => Error::Config(msg),
        Error::InvalidArgument(msg) | Error::Config(msg) => Error::Config(format!("field `{name}`: {msg}")),
        other => Error::Config(format!("field `{name}`: {other}")),
    }
}

impl Experiment {
    pub fn output_dir(&self) -> &Path {
        self.config.output_dir.as_deref().expect("resolved configs carry an output directory")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
        "name": "tiny",
        "dimension": 1,
        "workspace": {"lower": [-10.0], "upper": [10.0]},
        "density": {"kind": "gaussian", "mean": [0.0], "variance": [3.0]},
        "controller": {"law": "otcc", "k": 0.5, "k_prime": 0.0001},
        "initial": {"kind": "lattice", "lower": [-10.0], "upper": [-5.0], "counts": [40]}
    }"#;

    #[test]
    fn defaults_are_filled() {
        let exp = ExperimentConfig::from_json(MINIMAL)
            .unwrap()
            .resolve(Some(Path::new("/tmp/x")))
            .unwrap();
        assert_eq!(exp.config.grid, Some(GridSpec { cells: vec![2000] }));
        assert_eq!(exp.sim.dt, 0.1);
        assert_eq!(exp.sim.max_time, 5000.0);
        assert!((exp.sim.steady_u_tol - 1e-4 * 0.5 * 20.0).abs() < 1e-18);
        assert!((exp.sim.steady_phi_tol - 1e-3 * 1e-4 / 40.0).abs() < 1e-20);
        assert_eq!(exp.initial.len(), 40);
        assert_eq!(exp.initial.positions[0], -10.0);
        assert_eq!(exp.initial.positions[39], -5.0);
        assert!(exp.initial.weights.iter().all(|&w| w == 0.0));
        assert_eq!(exp.output_dir(), Path::new("/tmp/x"));
    }

    #[test]
    fn resolved_config_round_trips() {
        let exp = ExperimentConfig::from_json(MINIMAL).unwrap().resolve(None).unwrap();
        let text = exp.config.to_json();
        let again = ExperimentConfig::from_json(&text).unwrap().resolve(None).unwrap();
        assert_eq!(again.config.to_json(), text);
    }

    #[test]
    fn errors_name_the_field() {
        let bad = MINIMAL.replace("\"otcc\"", "\"lloyd\"");
        let err = ExperimentConfig::from_json(&bad).unwrap_err().to_string();
        assert!(err.contains("controller.law"), "{err}");

        let bad = MINIMAL.replace("\"k\": 0.5", "\"gain\": 0.5");
        let err = ExperimentConfig::from_json(&bad).unwrap_err().to_string();
        assert!(err.contains("controller"), "{err}");

        let bad = MINIMAL.replace("\"initial\"", "\"simulation\": {\"dt\": -1.0}, \"initial\"");
        let err = ExperimentConfig::from_json(&bad)
            .unwrap()
            .resolve(None)
            .unwrap_err()
            .to_string();
        assert!(err.contains("simulation") && err.contains("dt"), "{err}");
    }

    #[test]
    fn two_dimensional_lattice() {
        let spec = InitialSpec::Lattice {
            lower: vec![-8.0, -8.0],
            upper: vec![-2.0, -2.0],
            counts: vec![5, 5],
        };
        let s = spec.build(2).unwrap();
        assert_eq!(s.len(), 25);
        assert_eq!(s.position(0), &[-8.0, -8.0]);
        assert_eq!(s.position(1), &[-8.0, -6.5]);
        assert_eq!(s.position(24), &[-2.0, -2.0]);
    }

    #[test]
    fn explicit_positions_outside_are_rejected() {
        let bad = MINIMAL.replace(
            r#"{"kind": "lattice", "lower": [-10.0], "upper": [-5.0], "counts": [40]}"#,
            r#"{"kind": "explicit", "positions": [[0.0], [12.0]]}"#,
        );
        let err = ExperimentConfig::from_json(&bad).unwrap().resolve(None).unwrap_err();
        assert!(err.to_string().contains("initial"), "{err}");
    }
}
