//! Scenario JSON. Every section except `start`, `goal` and `bounds` is
//! optional and any missing field falls back to the core default; unknown
//! keys are rejected.

use std::fs;
use std::path::Path;

use kbf_core::{
    Bounds, CbfParams, ClfParams, Obstacle, PlannerConfig, RobotParams, Scenario, State,
};
use serde::{Deserialize, Serialize};

use crate::error::{ParseError, ScenarioError};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    pub start: StateDto,
    pub goal: StateDto,
    #[serde(default)]
    pub obstacles: Vec<ObstacleDto>,
    pub bounds: BoundsDto,
    #[serde(default)]
    pub robot: RobotDto,
    #[serde(default)]
    pub cbf: CbfDto,
    #[serde(default)]
    pub clf: ClfDto,
    #[serde(default)]
    pub planner: PlannerDto,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateDto {
    pub x: f64,
    pub y: f64,
    #[serde(default)]
    pub theta: f64,
    #[serde(default)]
    pub v: f64,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObstacleDto {
    pub x: f64,
    pub y: f64,
    pub r: f64,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundsDto {
    pub xmin: f64,
    pub xmax: f64,
    pub ymin: f64,
    pub ymax: f64,
}

/// `psi_max` is in radians.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RobotDto {
    pub wheelbase: f64,
    pub psi_max: f64,
    pub a_max: f64,
    pub v_max: f64,
    pub radius: f64,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CbfDto {
    pub gamma1: f64,
    pub gamma2: f64,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ClfDto {
    pub kp: [[f64; 2]; 2],
    pub kd: [[f64; 2]; 2],
    pub q: [[f64; 4]; 4],
    pub penalty: f64,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PlannerDto {
    pub step_size: f64,
    pub dt: f64,
    pub max_iters: usize,
    pub goal_tolerance: f64,
    pub seed: u64,
    pub goal_bias: f64,
    pub qp_substeps: usize,
}

impl From<StateDto> for State {
    fn from(d: StateDto) -> Self {
        State::new(d.x, d.y, d.theta, d.v)
    }
}

impl From<State> for StateDto {
    fn from(s: State) -> Self {
        Self {
            x: s.x,
            y: s.y,
            theta: s.theta,
            v: s.v,
        }
    }
}

impl From<ObstacleDto> for Obstacle {
    fn from(d: ObstacleDto) -> Self {
        Obstacle::new(d.x, d.y, d.r)
    }
}

impl From<Obstacle> for ObstacleDto {
    fn from(o: Obstacle) -> Self {
        Self {
            x: o.x,
            y: o.y,
            r: o.r,
        }
    }
}

impl From<BoundsDto> for Bounds {
    fn from(d: BoundsDto) -> Self {
        Bounds::new(d.xmin, d.xmax, d.ymin, d.ymax)
    }
}

impl From<Bounds> for BoundsDto {
    fn from(b: Bounds) -> Self {
        Self {
            xmin: b.xmin,
            xmax: b.xmax,
            ymin: b.ymin,
            ymax: b.ymax,
        }
    }
}

impl Default for RobotDto {
    fn default() -> Self {
        RobotParams::default().into()
    }
}

impl From<RobotDto> for RobotParams {
    fn from(d: RobotDto) -> Self {
        Self {
            wheelbase: d.wheelbase,
            psi_max: d.psi_max,
            a_max: d.a_max,
            v_max: d.v_max,
            radius: d.radius,
        }
    }
}

impl From<RobotParams> for RobotDto {
    fn from(r: RobotParams) -> Self {
        Self {
            wheelbase: r.wheelbase,
            psi_max: r.psi_max,
            a_max: r.a_max,
            v_max: r.v_max,
            radius: r.radius,
        }
    }
}

impl Default for CbfDto {
    fn default() -> Self {
        CbfParams::default().into()
    }
}

impl From<CbfDto> for CbfParams {
    fn from(d: CbfDto) -> Self {
        Self {
            gamma1: d.gamma1,
            gamma2: d.gamma2,
        }
    }
}

impl From<CbfParams> for CbfDto {
    fn from(c: CbfParams) -> Self {
        Self {
            gamma1: c.gamma1,
            gamma2: c.gamma2,
        }
    }
}

impl Default for ClfDto {
    fn default() -> Self {
        ClfParams::default().into()
    }
}

impl From<ClfDto> for ClfParams {
    fn from(d: ClfDto) -> Self {
        Self {
            kp: d.kp,
            kd: d.kd,
            q: d.q,
            penalty: d.penalty,
        }
    }
}

impl From<ClfParams> for ClfDto {
    fn from(c: ClfParams) -> Self {
        Self {
            kp: c.kp,
            kd: c.kd,
            q: c.q,
            penalty: c.penalty,
        }
    }
}

impl Default for PlannerDto {
    fn default() -> Self {
        PlannerConfig::default().into()
    }
}

impl From<PlannerDto> for PlannerConfig {
    fn from(d: PlannerDto) -> Self {
        Self {
            step_size: d.step_size,
            dt: d.dt,
            max_iters: d.max_iters,
            goal_tolerance: d.goal_tolerance,
            seed: d.seed,
            goal_bias: d.goal_bias,
            qp_substeps: d.qp_substeps,
        }
    }
}

impl From<PlannerConfig> for PlannerDto {
    fn from(p: PlannerConfig) -> Self {
        Self {
            step_size: p.step_size,
            dt: p.dt,
            max_iters: p.max_iters,
            goal_tolerance: p.goal_tolerance,
            seed: p.seed,
            goal_bias: p.goal_bias,
            qp_substeps: p.qp_substeps,
        }
    }
}

impl From<ScenarioFile> for Scenario {
    fn from(f: ScenarioFile) -> Self {
        Scenario {
            start: f.start.into(),
            goal: f.goal.into(),
            obstacles: f.obstacles.into_iter().map(Obstacle::from).collect(),
            bounds: f.bounds.into(),
            robot: f.robot.into(),
            cbf: f.cbf.into(),
            clf: f.clf.into(),
            planner: f.planner.into(),
        }
    }
}

impl From<&Scenario> for ScenarioFile {
    fn from(s: &Scenario) -> Self {
        Self {
            description: None,
            start: s.start.into(),
            goal: s.goal.into(),
            obstacles: s.obstacles.iter().copied().map(ObstacleDto::from).collect(),
            bounds: s.bounds.into(),
            robot: s.robot.into(),
            cbf: s.cbf.into(),
            clf: s.clf.into(),
            planner: s.planner.into(),
        }
    }
}

/// Parses and defaults a scenario without validating it.
pub fn parse_scenario(json: &str) -> Result<Scenario, ParseError> {
    let file: ScenarioFile = serde_json::from_str(json)?;
    Ok(file.into())
}

/// Parses, defaults and validates.
pub fn scenario_from_str(json: &str) -> Result<Scenario, ScenarioError> {
    let s = parse_scenario(json)?;
    kbf_core::validate_scenario(s).map_err(ScenarioError::Invalid)
}

pub fn load_scenario(path: impl AsRef<Path>) -> Result<Scenario, ScenarioError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| ScenarioError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    scenario_from_str(&text)
}

/// Pretty JSON with every section written out.
pub fn scenario_to_json(s: &Scenario) -> String {
    serde_json::to_string_pretty(&ScenarioFile::from(s)).expect("scenario is always serializable")
}

/// Name used in reports: the file stem, e.g. `scenario1`.
pub fn scenario_name(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}
