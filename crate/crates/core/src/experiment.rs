//! Experiment configuration, setup of the insertion / suction / occlusion
//! runs, and the on-disk output of a run.
//!
//! Configs are flat TOML. Only `experiment` is required; every other key
//! falls back to the preset of that experiment.
//!
//! ```toml
//! experiment = "suction"
//! w_suction = -10000.0   # cm/s
//! ```

use crate::boundary::{
    BoundarySpec, DeviceBoundary, LeftBoundary, PressureWaveform, RightBoundary,
};
use crate::coupling::DiscriminantPolicy;
use crate::physio::{CatheterConfig, PhysioError, VesselParams};
use crate::scheme::{Grid, SchemeOptions, SimState, Solver, StepError, StepInfo};
use crate::snapshot::{Snapshot, SnapshotError};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Insertion,
    Suction,
    Occlusion,
    Custom,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LeftBoundaryKind {
    Neumann,
    InletPressure,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RightBoundaryKind {
    Neumann,
    Reflection,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DeviceBoundaryKind {
    Neumann,
    FixedVelocity,
}

/// How the initial lumen area is read on the catheterized side.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialArea {
    /// The wall starts at rest: gross area `A0`, net area `A0 - A_c`,
    /// zero gauge pressure on both segments.
    GrossReference,
    /// Net area `A0` on both segments; the catheterized wall starts
    /// inflated by the device footprint.
    NetReference,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    /// Cells per segment.
    pub n_cells: usize,
    /// Vessel reference radius (cm).
    pub r0: f64,
    /// Wall thickness (cm).
    pub h0: f64,
    /// Young modulus (dyne/cm²).
    pub young_modulus: f64,
    /// Blood density (g/cm³).
    pub rho: f64,
    /// Catheter radius (cm); 0 for an untreated vessel.
    pub rc: f64,
    /// Initial blood velocity (cm/s).
    pub u_init: f64,
    /// Initial device velocity (cm/s).
    pub w_suction: f64,
    pub initial_area: InitialArea,
    /// Reflection coefficient at the right end.
    pub reflection: f64,
    /// Inlet gauge pressure amplitude (dyne/cm²).
    pub inlet_amplitude: f64,
    /// Inlet pressure frequency (1/s).
    pub inlet_frequency: f64,
    pub left_boundary: LeftBoundaryKind,
    pub right_boundary: RightBoundaryKind,
    pub device_boundary: DeviceBoundaryKind,
    pub clamp_discriminant: bool,
    /// End time (s).
    pub t_end: f64,
    /// Times (s) at which a CSV snapshot is written.
    pub snapshot_times: Vec<f64>,
    pub output_path: PathBuf,
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("config parse error: {0}")]
    Parse(String),
    #[error("invalid config field {field}: {message}")]
    Invalid {
        field: &'static str,
        message: String,
    },
    #[error(transparent)]
    Physics(#[from] PhysioError),
}

fn invalid(field: &'static str, message: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        field,
        message: message.into(),
    }
}

impl ExperimentConfig {
    /// Catheter insertion into a uniformly flowing vessel.
    pub fn insertion() -> Self {
        Self {
            experiment: ExperimentKind::Insertion,
            n_cells: 400,
            r0: 0.5,
            h0: 0.05,
            young_modulus: 3.0e6,
            rho: 1.0,
            rc: 0.1,
            u_init: 254.65,
            w_suction: 0.0,
            initial_area: InitialArea::GrossReference,
            reflection: 0.8,
            inlet_amplitude: 8.0e4,
            inlet_frequency: 1.0,
            left_boundary: LeftBoundaryKind::Neumann,
            right_boundary: RightBoundaryKind::Neumann,
            device_boundary: DeviceBoundaryKind::Neumann,
            clamp_discriminant: false,
            t_end: 0.007,
            snapshot_times: vec![0.002, 0.005, 0.007],
            output_path: PathBuf::from("out/insertion"),
        }
    }

    /// Constant aspiration through a catheter of radius 0.1 cm.
    pub fn suction() -> Self {
        Self {
            experiment: ExperimentKind::Suction,
            rc: 0.1,
            w_suction: -5000.0,
            t_end: 0.005,
            snapshot_times: vec![0.0025, 0.005],
            output_path: PathBuf::from("out/suction"),
            ..Self::insertion()
        }
    }

    /// Half a heartbeat against a distal occlusion while aspirating.
    pub fn occlusion() -> Self {
        Self {
            experiment: ExperimentKind::Occlusion,
            rc: 0.1,
            w_suction: -1000.0,
            left_boundary: LeftBoundaryKind::InletPressure,
            right_boundary: RightBoundaryKind::Reflection,
            t_end: 0.5,
            snapshot_times: (0..=50).map(|i| i as f64 / 100.0).collect(),
            output_path: PathBuf::from("out/occlusion"),
            ..Self::insertion()
        }
    }

    pub fn preset(kind: ExperimentKind) -> Self {
        match kind {
            ExperimentKind::Insertion => Self::insertion(),
            ExperimentKind::Suction => Self::suction(),
            ExperimentKind::Occlusion => Self::occlusion(),
            ExperimentKind::Custom => Self {
                experiment: ExperimentKind::Custom,
                output_path: PathBuf::from("out/custom"),
                ..Self::insertion()
            },
        }
    }

    /// Parses a config, filling absent keys from the preset named by
    /// `experiment`.
    pub fn from_toml_str(text: &str) -> Result<Self, ConfigError> {
        let user: toml::Table = text
            .parse()
            .map_err(|e: toml::de::Error| ConfigError::Parse(e.to_string()))?;
        let kind = user
            .get("experiment")
            .ok_or_else(|| invalid("experiment", "missing"))?
            .clone()
            .try_into::<ExperimentKind>()
            .map_err(|e| invalid("experiment", e.to_string()))?;

        let mut merged = toml::Table::try_from(Self::preset(kind))
            .map_err(|e| ConfigError::Parse(e.to_string()))?;
        for (key, value) in user {
            if !merged.contains_key(&key) {
                return Err(ConfigError::Parse(format!("unknown field `{key}`")));
            }
            merged.insert(key, value);
        }
        let config: Self = toml::Value::Table(merged)
            .try_into()
            .map_err(|e: toml::de::Error| ConfigError::Parse(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn from_path(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError::Parse(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes to toml")
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.n_cells < 2 {
            return Err(invalid(
                "n_cells",
                format!("need at least 2, got {}", self.n_cells),
            ));
        }
        for (field, value) in [
            ("r0", self.r0),
            ("h0", self.h0),
            ("young_modulus", self.young_modulus),
            ("rho", self.rho),
            ("t_end", self.t_end),
        ] {
            if !(value > 0.0 && value.is_finite()) {
                return Err(invalid(field, format!("must be positive, got {value}")));
            }
        }
        if !(self.rc >= 0.0 && self.rc < self.r0) {
            return Err(invalid(
                "rc",
                format!("must lie in [0, r0), got {}", self.rc),
            ));
        }
        for (field, value) in [
            ("u_init", self.u_init),
            ("w_suction", self.w_suction),
            ("inlet_amplitude", self.inlet_amplitude),
            ("inlet_frequency", self.inlet_frequency),
        ] {
            if !value.is_finite() {
                return Err(invalid(field, format!("must be finite, got {value}")));
            }
        }
        if !(0.0..=1.0).contains(&self.reflection) {
            return Err(invalid(
                "reflection",
                format!("must lie in [0, 1], got {}", self.reflection),
            ));
        }
        if let Some(&t) = self
            .snapshot_times
            .iter()
            .find(|&&t| !(t >= 0.0 && t <= self.t_end))
        {
            return Err(invalid(
                "snapshot_times",
                format!("{t} is outside [0, t_end]"),
            ));
        }
        Ok(())
    }

    pub fn boundary_spec(&self) -> BoundarySpec {
        BoundarySpec {
            left: match self.left_boundary {
                LeftBoundaryKind::Neumann => LeftBoundary::Neumann,
                LeftBoundaryKind::InletPressure => {
                    LeftBoundary::InletPressure(PressureWaveform::Sine {
                        amplitude: self.inlet_amplitude,
                        frequency: self.inlet_frequency,
                    })
                }
            },
            right: match self.right_boundary {
                RightBoundaryKind::Neumann => RightBoundary::Neumann,
                RightBoundaryKind::Reflection => RightBoundary::Reflection(self.reflection),
            },
            device: match self.device_boundary {
                DeviceBoundaryKind::Neumann => DeviceBoundary::Neumann,
                DeviceBoundaryKind::FixedVelocity => DeviceBoundary::FixedVelocity(self.w_suction),
            },
        }
    }
}

/// Initial state plus the solver that advances it.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub initial: SimState,
    pub solver: Solver,
}

pub fn build_experiment(config: &ExperimentConfig) -> Result<Experiment, ConfigError> {
    config.validate()?;
    let params = VesselParams::from_radius(config.r0, config.young_modulus, config.h0, config.rho)?;
    let catheter = CatheterConfig::from_radius(config.rc, config.w_suction);
    catheter.validate(&params)?;
    let boundary = config.boundary_spec();
    boundary.validate()?;
    let grid = Grid::new(config.n_cells).map_err(|e| invalid("n_cells", e.to_string()))?;
    let options = SchemeOptions {
        discriminant: if config.clamp_discriminant {
            DiscriminantPolicy::Clamp
        } else {
            DiscriminantPolicy::Fail
        },
    };
    let mut initial = SimState::uniform(config.n_cells, params.a0, config.u_init, config.w_suction);
    if config.initial_area == InitialArea::GrossReference {
        initial.a[..config.n_cells].fill(params.a0 - catheter.area);
    }
    Ok(Experiment {
        initial,
        solver: Solver::new(grid, params, catheter, boundary).with_options(options),
    })
}

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("solver failure: {0}")]
    Solver(#[from] StepError),
    #[error("output: {0}")]
    Snapshot(#[from] SnapshotError),
    #[error("output: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnapshotEntry {
    pub t: f64,
    pub file: String,
}

/// Machine-readable record of a finished run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub config: ExperimentConfig,
    pub beta: f64,
    pub a0: f64,
    pub catheter_area: f64,
    pub dx: f64,
    pub steps: usize,
    pub final_time: f64,
    pub snapshots: Vec<SnapshotEntry>,
    pub lambda_history: Vec<f64>,
    pub dt_history: Vec<f64>,
}

pub const MANIFEST_FILE: &str = "manifest.json";

/// Runs an experiment in memory, returning the snapshots and the summary.
pub fn simulate(config: &ExperimentConfig) -> Result<(Vec<Snapshot>, RunSummary), ExperimentError> {
    let Experiment { initial, solver } = build_experiment(config)?;
    let mut lambda_history = Vec::new();
    let mut dt_history = Vec::new();
    let mut record = |info: &StepInfo, _: &SimState| {
        lambda_history.push(info.lambda);
        dt_history.push(info.dt);
    };

    let mut times = config.snapshot_times.clone();
    times.sort_by(f64::total_cmp);
    let mut state = initial;
    let mut snapshots = Vec::with_capacity(times.len());
    for &t in &times {
        state = solver.run(state, t, &mut record)?;
        log::debug!("snapshot at t = {t}");
        snapshots.push(Snapshot::from_state(
            &state,
            &solver.grid,
            &solver.params,
            &solver.catheter,
        ));
    }
    state = solver.run(state, config.t_end, &mut record)?;

    let entries = times
        .iter()
        .enumerate()
        .map(|(i, &t)| SnapshotEntry {
            t,
            file: snapshot_file_name(i),
        })
        .collect();
    let summary = RunSummary {
        config: config.clone(),
        beta: solver.params.beta,
        a0: solver.params.a0,
        catheter_area: solver.catheter.area,
        dx: solver.grid.dx(),
        steps: lambda_history.len(),
        final_time: state.t,
        snapshots: entries,
        lambda_history,
        dt_history,
    };
    Ok((snapshots, summary))
}

pub fn snapshot_file_name(index: usize) -> String {
    format!("snapshot_{index:03}.csv")
}

/// Runs an experiment and writes one CSV per snapshot plus
/// [`MANIFEST_FILE`] into `out_dir`.
pub fn run_experiment(
    config: &ExperimentConfig,
    out_dir: &Path,
) -> Result<RunSummary, ExperimentError> {
    let (snapshots, summary) = simulate(config)?;
    std::fs::create_dir_all(out_dir)?;
    for (snap, entry) in snapshots.iter().zip(&summary.snapshots) {
        let file = std::fs::File::create(out_dir.join(&entry.file))?;
        snap.write_csv(std::io::BufWriter::new(file))?;
    }
    let manifest = serde_json::to_string_pretty(&summary).expect("summary serializes");
    std::fs::write(out_dir.join(MANIFEST_FILE), manifest)?;
    Ok(summary)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    #[test]
    fn insertion_defaults() {
        let exp = build_experiment(&ExperimentConfig::insertion()).unwrap();
        let params = exp.solver.params;
        assert_relative_eq!(params.a0, PI / 4.0, max_relative = 1e-15);
        assert_relative_eq!(params.beta, 3.38514e5, max_relative = 1e-6);
        assert_eq!(exp.solver.boundary, BoundarySpec::neumann());
        assert!(exp.initial.u.iter().all(|&u| u == 254.65));
        assert!(exp.initial.w.iter().all(|&w| w == 0.0));
        let n = exp.solver.grid.cells_per_side();
        let area_c = exp.solver.catheter.area;
        assert!(exp.initial.a[..n].iter().all(|&a| a == params.a0 - area_c));
        assert!(exp.initial.a[n..].iter().all(|&a| a == params.a0));

        let mut literal = ExperimentConfig::insertion();
        literal.initial_area = InitialArea::NetReference;
        let exp = build_experiment(&literal).unwrap();
        assert!(exp.initial.a.iter().all(|&a| a == params.a0));
    }

    #[test]
    fn wall_starts_at_rest() {
        for config in [
            ExperimentConfig::insertion(),
            ExperimentConfig::suction(),
            ExperimentConfig::occlusion(),
        ] {
            let exp = build_experiment(&config).unwrap();
            let s = &exp.solver;
            let snap = crate::Snapshot::from_state(&exp.initial, &s.grid, &s.params, &s.catheter);
            for row in &snap.rows {
                assert!(row.p.abs() < 1e-9, "{row:?}");
                assert_relative_eq!(row.a_gross, s.params.a0, max_relative = 1e-15);
            }
        }
    }

    #[test]
    fn suction_and_occlusion_defaults() {
        let suction = ExperimentConfig::suction();
        assert_eq!(suction.w_suction, -5000.0);
        assert_eq!(suction.rc, 0.1);
        let exp = build_experiment(&suction).unwrap();
        assert!(exp.initial.w.iter().all(|&w| w == -5000.0));

        let occlusion = ExperimentConfig::occlusion();
        let exp = build_experiment(&occlusion).unwrap();
        assert_eq!(exp.solver.boundary.right, RightBoundary::Reflection(0.8));
        assert_eq!(
            exp.solver.boundary.left,
            LeftBoundary::InletPressure(PressureWaveform::heartbeat())
        );
        assert_eq!(occlusion.t_end, 0.5);
        assert_eq!(occlusion.w_suction, -1000.0);
        assert_eq!(*occlusion.snapshot_times.last().unwrap(), 0.5);
    }

    #[test]
    fn partial_config_fills_from_preset() {
        let config =
            ExperimentConfig::from_toml_str("experiment = \"suction\"\nw_suction = -10000.0\n")
                .unwrap();
        assert_eq!(config.w_suction, -10000.0);
        assert_eq!(config.snapshot_times, vec![0.0025, 0.005]);
        assert_eq!(config.experiment, ExperimentKind::Suction);
    }

    #[test]
    fn config_errors_name_the_field() {
        let err =
            ExperimentConfig::from_toml_str("experiment = \"insertion\"\nrc = 0.6\n").unwrap_err();
        assert!(
            matches!(err, ConfigError::Invalid { field: "rc", .. }),
            "{err}"
        );
        let err = ExperimentConfig::from_toml_str("experiment = \"insertion\"\nn_cells = 1\n")
            .unwrap_err();
        assert!(matches!(
            err,
            ConfigError::Invalid {
                field: "n_cells",
                ..
            }
        ));
        let err =
            ExperimentConfig::from_toml_str("experiment = \"insertion\"\nbogus = 1\n").unwrap_err();
        assert!(err.to_string().contains("bogus"));
        let err = ExperimentConfig::from_toml_str("n_cells = 10\n").unwrap_err();
        assert!(matches!(
            err,
            ConfigError::Invalid {
                field: "experiment",
                ..
            }
        ));
        let err =
            ExperimentConfig::from_toml_str("experiment = \"insertion\"\nsnapshot_times = [0.1]\n")
                .unwrap_err();
        assert!(matches!(
            err,
            ConfigError::Invalid {
                field: "snapshot_times",
                ..
            }
        ));
    }

    #[test]
    fn untreated_vessel_uses_transparent_tip() {
        let mut config = ExperimentConfig::occlusion();
        config.rc = 0.0;
        config.w_suction = 0.0;
        let exp = build_experiment(&config).unwrap();
        assert_eq!(exp.solver.catheter.area, 0.0);
    }

    #[test]
    fn simulate_small_insertion() {
        let mut config = ExperimentConfig::insertion();
        config.n_cells = 40;
        let (snaps, summary) = simulate(&config).unwrap();
        assert_eq!(snaps.len(), 3);
        assert_eq!(summary.final_time, config.t_end);
        for (snap, t) in snaps.iter().zip(&config.snapshot_times) {
            assert_eq!(snap.t, *t);
            assert_eq!(snap.rows.len(), 80);
        }
        assert_eq!(summary.lambda_history.len(), summary.steps);
    }

    proptest! {
        #[test]
        fn config_round_trip(
            kind in prop_oneof![
                Just(ExperimentKind::Insertion),
                Just(ExperimentKind::Suction),
                Just(ExperimentKind::Occlusion),
                Just(ExperimentKind::Custom),
            ],
            n in 2usize..5000,
            rc in 0.0f64..0.49,
            w in -2e4f64..0.0,
            r in 0.0f64..=1.0,
            clamp in any::<bool>(),
        ) {
            let mut config = ExperimentConfig::preset(kind);
            config.n_cells = n;
            config.rc = rc;
            config.w_suction = w;
            config.reflection = r;
            config.clamp_discriminant = clamp;
            let back = ExperimentConfig::from_toml_str(&config.to_toml_string()).unwrap();
            prop_assert_eq!(back, config);
        }
    }
}
